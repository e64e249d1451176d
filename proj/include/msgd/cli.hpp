#pragma once

// Command-line surface. Commands:
//   calibrate      simulate null critical values into a cache file
//   detect         evaluate one statistic on a grid file against kappa
//   power          power table over (k, mu) signal cells
//   null-ecdf      sorted null sample as CSV (optionally SVG)
//   packing-check  greedy packing sweep and bound ratios
//   vlt1           finest-scale growth table for penalty constants v <= 1
//
// Every run writes its primary artifact plus a sidecar manifest
// "<artifact>.manifest.json" holding the config echo (threads excluded: it
// never changes results, and manifests must be byte-identical across worker
// counts) and git-style blob hashes of the input files.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "msgd/nd.hpp"

namespace msgd {

struct RunConfig {
    std::string command;

    dims_t dims;                       // empty for detect (taken from the grid file)
    std::string stat = "multiscale";   // single-statistic commands
    std::vector<std::string> stats;    // power: statistics to compare
    std::string kernel = "indicator";
    double penalty_v = 1.0;
    bool penalty_v_set = false;
    double alpha = 0.05;
    std::vector<double> alphas;        // calibrate: extra levels (alpha used if empty)
    int reps = 0;                      // 0 = command default (3000 calibrate, 1000 power)
    std::uint64_t seed = 0;
    int threads = 1;
    int min_side = 0;                  // 0 = unbounded
    int max_side = 0;
    std::string out;                   // primary artifact ("" = command default)
    std::string cache;                 // calibration cache path
    std::string grid;                  // detect: input grid file
    double kappa = 0.0;
    bool kappa_set = false;
    bool exit_code_signal = false;
    bool keep_sample = false;
    std::string format = "csv";        // table output: "csv" or "json"
    std::string svg;                   // optional plot path
    std::vector<std::string> cells;    // power: "k=1,mu=5.5" per cell

    // packing-check / vlt1 ambient dimension
    int d = 2;

    // packing-check
    std::vector<double> deltas{1.0, 0.5, 0.25, 0.125};
    std::vector<double> us{1.0, 0.5, 0.25};
    int lattice_res = 128;

    // vlt1
    double v = 0.25;
    std::vector<int> m_list{16, 64, 256};
    int n_seeds = 50;

    bool operator==(const RunConfig& o) const;  // ignores threads (not serialized)
};

// Full validation included; throws std::invalid_argument on unknown flags,
// unparseable values, or incompatible combinations (for example a pure-max
// statistic with "--penalty-v": "penalty not applicable").
RunConfig parse_args(const std::vector<std::string>& args);

// Serialization used by the manifest echo; threads deliberately excluded.
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// Executes a validated config. Returns the process exit status: 0 on
// success, 2 when a detection was signalled and exit_code_signal is set.
// Throws on execution errors (I/O failures, cache misses, ...).
int run(const RunConfig& cfg);

// parse + run + error reporting; the main() body.
int cli_main(int argc, char** argv);

// Git-style blob hash ("blob <size>\0<content>", SHA-1, lowercase hex).
std::string git_blob_sha1(const std::string& content);
std::string git_blob_sha1_file(const std::string& path);

}  // namespace msgd
