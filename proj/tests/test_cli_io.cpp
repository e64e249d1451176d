#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "msgd/cli.hpp"
#include "msgd/grid.hpp"
#include "msgd/grid_io.hpp"
#include "msgd/svg.hpp"

using msgd::GridField;
using msgd::RunConfig;
using nlohmann::json;

namespace {

// Unique scratch directory, removed on scope exit.
struct TmpDir {
    std::filesystem::path path;

    TmpDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("msgd_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// The run() implementations narrate to stdout (and cli_main reports errors
// on stderr); keep the test log clean.
struct CoutSilencer {
    std::ostringstream sink;
    std::streambuf* old_out;
    std::streambuf* old_err;
    CoutSilencer()
        : old_out(std::cout.rdbuf(sink.rdbuf())), old_err(std::cerr.rdbuf(sink.rdbuf())) {}
    ~CoutSilencer() {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

void put_u32(std::string& s, std::uint32_t v) {
    s.append(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::string& s, double v) {
    s.append(reinterpret_cast<const char*>(&v), 8);
}

std::size_t count_substr(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

// =============================================================================
// Grid files
// =============================================================================

TEST_CASE("grid csv round trip is lossless and byte-stable") {
    TmpDir tmp;
    const std::string path = tmp.file("g.csv");
    const GridField g = GridField::from_values({2, 3}, {1.0, 2.0, 3.0, 4.5, 0.1, -6.0});
    msgd::write_grid_csv(path, g);
    CHECK(slurp(path) == "2,3\n1,2,3\n4.5,0.1,-6\n");

    const GridField back = msgd::read_grid_csv(path);
    CHECK(back.dims == g.dims);
    REQUIRE(back.values.size() == g.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i) CHECK(back.values[i] == g.values[i]);
}

TEST_CASE("grid binary round trip preserves every bit") {
    TmpDir tmp;
    const std::string path = tmp.file("g.bin");
    const GridField g = GridField::from_values(
        {3, 2}, {1e308, 5e-324, -0.0, 0.1, -123456.75, 2.2250738585072014e-308});
    msgd::write_grid_binary(path, g);

    const std::string bytes = slurp(path);
    REQUIRE(bytes.size() == 4 + 4 + 2 * 4 + 6 * 8);
    CHECK(bytes.compare(0, 4, "MSGD") == 0);
    std::uint32_t d = 0;
    std::memcpy(&d, bytes.data() + 4, 4);
    CHECK(d == 2);

    const GridField back = msgd::read_grid_binary(path);
    CHECK(back.dims == g.dims);
    REQUIRE(back.values.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(back.values[i] == g.values[i]);
    CHECK(std::signbit(back.values[2]));  // -0.0 survives
}

TEST_CASE("grid reader dispatches on the file extension") {
    TmpDir tmp;
    const GridField g = GridField::from_values({2, 2}, {1.0, 2.0, 3.0, 4.0});
    msgd::write_grid_csv(tmp.file("a.csv"), g);
    msgd::write_grid_binary(tmp.file("a.grid"), g);
    CHECK(msgd::read_grid_auto(tmp.file("a.csv")).values == g.values);
    CHECK(msgd::read_grid_auto(tmp.file("a.grid")).values == g.values);
}

TEST_CASE("grid reader rejects malformed text input") {
    TmpDir tmp;
    const std::string missing = tmp.file("nope.csv");
    CHECK_THROWS_WITH_AS(msgd::read_grid_csv(missing),
                         ("cannot open grid file: " + missing).c_str(), std::runtime_error);

    const std::string p = tmp.file("bad.csv");
    spit(p, "");
    CHECK_THROWS_WITH_AS(msgd::read_grid_csv(p),
                         ("malformed grid file " + p + ": missing header").c_str(),
                         std::runtime_error);
    spit(p, "2,x\n1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(msgd::read_grid_csv(p),
                         ("malformed grid file " + p + ": bad header token 'x'").c_str(),
                         std::runtime_error);
    spit(p, "2,2\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(msgd::read_grid_csv(p),
                         ("malformed grid file " + p + ": expected 4 values, found 3").c_str(),
                         std::runtime_error);
    spit(p, "2\n1,oops\n");
    CHECK_THROWS_WITH_AS(msgd::read_grid_csv(p),
                         ("malformed grid file " + p + ": bad value 'oops'").c_str(),
                         std::runtime_error);
    spit(p, "2\nnan,1\n");
    CHECK_THROWS_WITH(msgd::read_grid_csv(p), "grid: non-finite value");
}

TEST_CASE("grid reader rejects malformed binary input") {
    TmpDir tmp;
    const std::string p = tmp.file("bad.bin");

    spit(p, "MSGX????");
    CHECK_THROWS_WITH_AS(msgd::read_grid_binary(p),
                         ("malformed grid file " + p + ": bad magic").c_str(),
                         std::runtime_error);

    std::string zero_d = "MSGD";
    put_u32(zero_d, 0);
    spit(p, zero_d);
    CHECK_THROWS_WITH_AS(msgd::read_grid_binary(p),
                         ("malformed grid file " + p + ": bad dimension count").c_str(),
                         std::runtime_error);

    std::string zero_axis = "MSGD";
    put_u32(zero_axis, 1);
    put_u32(zero_axis, 0);
    spit(p, zero_axis);
    CHECK_THROWS_WITH_AS(msgd::read_grid_binary(p),
                         ("malformed grid file " + p + ": bad axis size").c_str(),
                         std::runtime_error);

    std::string truncated = "MSGD";
    put_u32(truncated, 1);
    put_u32(truncated, 3);
    put_f64(truncated, 1.0);
    put_f64(truncated, 2.0);
    spit(p, truncated);
    CHECK_THROWS_WITH_AS(msgd::read_grid_binary(p),
                         ("malformed grid file " + p + ": truncated values").c_str(),
                         std::runtime_error);

    std::string trailing = truncated;
    put_f64(trailing, 3.0);
    trailing.push_back('\0');
    spit(p, trailing);
    CHECK_THROWS_WITH_AS(msgd::read_grid_binary(p),
                         ("malformed grid file " + p + ": trailing bytes").c_str(),
                         std::runtime_error);
}

// =============================================================================
// SVG plots
// =============================================================================

TEST_CASE("svg rendering is deterministic and escapes names") {
    msgd::Series a{"a<b", {{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}}};
    msgd::Series b{"ref&line", {{0.0, 1.0}, {2.0, 3.0}}};
    const std::string doc = msgd::render_svg({a, b});
    CHECK(doc == msgd::render_svg({a, b}));
    CHECK(doc.find("<svg xmlns=") != std::string::npos);
    CHECK(count_substr(doc, "<polyline") == 2);
    CHECK(doc.find("a&lt;b") != std::string::npos);
    CHECK(doc.find("ref&amp;line") != std::string::npos);

    CHECK_THROWS_WITH_AS(msgd::render_svg({}), "empty series", std::invalid_argument);
    CHECK_THROWS_WITH_AS(msgd::render_svg({msgd::Series{"x", {}}}), "empty series",
                         std::invalid_argument);

    TmpDir tmp;
    msgd::emit_svg({a}, tmp.file("plot.svg"));
    CHECK(slurp(tmp.file("plot.svg")) == msgd::render_svg({a}));
    const std::string bad = tmp.file("no_such_dir/plot.svg");
    CHECK_THROWS_WITH_AS(msgd::emit_svg({a}, bad), ("cannot write svg: " + bad).c_str(),
                         std::runtime_error);
}

// =============================================================================
// Configuration parsing and serialization
// =============================================================================

TEST_CASE("parsed config round trips through json, threads excluded") {
    const RunConfig cfg = msgd::parse_args(
        {"calibrate", "--dims", "6,5", "--stat", "scan", "--reps", "120", "--seed", "9",
         "--alpha", "0.1", "--alphas", "0.05,0.1", "--cache", "c.json", "--keep-sample",
         "--threads", "4"});
    CHECK(cfg.command == "calibrate");
    CHECK(cfg.dims == msgd::dims_t{6, 5});
    CHECK(cfg.stat == "scan");
    CHECK(cfg.reps == 120);
    CHECK(cfg.seed == 9);
    CHECK(cfg.alpha == 0.1);
    CHECK(cfg.alphas == std::vector<double>{0.05, 0.1});
    CHECK(cfg.cache == "c.json");
    CHECK(cfg.keep_sample);
    CHECK(cfg.threads == 4);

    const json j = msgd::config_to_json(cfg);
    CHECK(!j.contains("threads"));
    RunConfig back = msgd::config_from_json(j);
    CHECK(back.threads == 1);  // not serialized
    CHECK(back == cfg);        // equality also ignores threads

    back.seed = 10;
    CHECK(!(back == cfg));
}

TEST_CASE("explicit kappa and square-grid shorthand parse correctly") {
    const RunConfig det = msgd::parse_args({"detect", "--grid", "g.csv", "--kappa", "2.5",
                                            "--exit-code-signal"});
    CHECK(det.kappa == 2.5);
    CHECK(det.kappa_set);
    CHECK(det.exit_code_signal);
    CHECK(det.dims.empty());
    CHECK(msgd::config_from_json(msgd::config_to_json(det)) == det);

    const RunConfig cube = msgd::parse_args({"null-ecdf", "--m", "4", "--d", "3"});
    CHECK(cube.dims == msgd::dims_t{4, 4, 4});
    const RunConfig square = msgd::parse_args({"null-ecdf", "--m", "7"});
    CHECK(square.dims == msgd::dims_t{7, 7});

    const RunConfig pack = msgd::parse_args({"packing-check"});
    CHECK(pack.d == 2);
    CHECK(pack.deltas == std::vector<double>{1.0, 0.5, 0.25, 0.125});
    CHECK(pack.us == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(pack.lattice_res == 128);
    CHECK(msgd::config_from_json(msgd::config_to_json(pack)) == pack);
}

TEST_CASE("argument validation rejects bad combinations") {
    CHECK_THROWS_WITH_AS(msgd::parse_args({"calibrate", "--stat", "scan"}),
                         "missing grid dimensions: use --dims or --m [--d]",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        msgd::parse_args({"calibrate", "--m", "5", "--stat", "scan", "--penalty-v", "0.5"}),
        "penalty not applicable", std::invalid_argument);
    CHECK_THROWS_AS(msgd::parse_args({"calibrate", "--m", "5", "--bogus"}),
                    std::invalid_argument);
    CHECK_THROWS_AS(msgd::parse_args({"frobnicate"}), std::invalid_argument);
    CHECK_THROWS_WITH_AS(msgd::parse_args({"calibrate", "--m", "5", "--threads", "0"}),
                         "--threads must be >= 1", std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        msgd::parse_args({"power", "--m", "4", "--kernel", "holder:0.5", "--cell", "k=1,mu=1"}),
        "power comparison requires the indicator kernel", std::invalid_argument);
    CHECK_THROWS_WITH_AS(msgd::parse_args({"power", "--m", "4"}),
                         "power: need at least one --cell k=...,mu=...", std::invalid_argument);
    CHECK_THROWS_WITH_AS(msgd::parse_args({"power", "--m", "4", "--cell", "k=2"}),
                         "bad cell spec: k=2", std::invalid_argument);
    CHECK_THROWS_WITH_AS(msgd::parse_args({"power", "--m", "4", "--cell", "k=x,mu=1"}),
                         "bad cell spec: k=x,mu=1", std::invalid_argument);
}

// =============================================================================
// Blob hashing
// =============================================================================

TEST_CASE("blob hashes match git hash-object") {
    CHECK(msgd::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(msgd::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(msgd::git_blob_sha1("what is up, doc?") ==
          "bd9dbf5aae1a3862dd1526723246b20206e5fc37");

    TmpDir tmp;
    const std::string p = tmp.file("blob.txt");
    spit(p, "hello\n");
    CHECK(msgd::git_blob_sha1_file(p) == "ce013625030ba8dba906f756967f9e9ca394464a");
    const std::string missing = tmp.file("gone.txt");
    CHECK_THROWS_WITH_AS(msgd::git_blob_sha1_file(missing),
                         ("cannot open input for hashing: " + missing).c_str(),
                         std::runtime_error);
}

// =============================================================================
// End-to-end command runs
// =============================================================================

TEST_CASE("calibrate then detect completes the cache round trip") {
    TmpDir tmp;
    CoutSilencer quiet;
    const std::string cache = tmp.file("cache.json");

    const RunConfig cal = msgd::parse_args({"calibrate", "--dims", "4,4", "--stat", "scan",
                                            "--reps", "200", "--seed", "7", "--alpha", "0.1",
                                            "--cache", cache});
    CHECK(msgd::run(cal) == 0);
    CHECK(std::filesystem::exists(cache));

    const json manifest = json::parse(slurp(cache + ".manifest.json"));
    CHECK(manifest.at("command") == "calibrate");
    CHECK(!manifest.at("config").contains("threads"));
    CHECK(msgd::config_from_json(manifest.at("config")) == cal);
    CHECK(manifest.at("inputs") == json::object());
    CHECK(manifest.at("artifacts") == json::array({cache}));

    // A pure 2x2 block of 8s: the scan value is exactly 32 / sqrt(4) = 16.
    const std::string gridfile = tmp.file("obs.csv");
    msgd::write_grid_csv(gridfile, GridField::from_values(
                                       {4, 4}, {8, 8, 0, 0, 8, 8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}));

    const std::string out = tmp.file("detect.json");
    const RunConfig det = msgd::parse_args({"detect", "--grid", gridfile, "--stat", "scan",
                                            "--cache", cache, "--alpha", "0.1", "--out", out,
                                            "--exit-code-signal"});
    CHECK(msgd::run(det) == 2);

    const json res = json::parse(slurp(out));
    CHECK(res.at("statistic") == "scan");
    CHECK(res.at("value") == 16.0);
    CHECK(res.at("reject") == true);
    CHECK(res.at("argmax_lo") == json::array({1, 1}));
    CHECK(res.at("argmax_hi") == json::array({2, 2}));
    CHECK(res.at("rect_count") == 100);

    const json dm = json::parse(slurp(out + ".manifest.json"));
    CHECK(dm.at("inputs").size() == 2);
    CHECK(dm.at("inputs").at(gridfile) == msgd::git_blob_sha1_file(gridfile));
    CHECK(dm.at("inputs").at(cache) == msgd::git_blob_sha1_file(cache));
    CHECK(dm.at("artifacts") == json::array({out}));

    // Explicit kappa skips the cache and retains under a huge threshold.
    const std::string out2 = tmp.file("detect2.json");
    const RunConfig det2 = msgd::parse_args({"detect", "--grid", gridfile, "--stat", "scan",
                                             "--kappa", "1e9", "--out", out2,
                                             "--exit-code-signal"});
    CHECK(msgd::run(det2) == 0);
    const json res2 = json::parse(slurp(out2));
    CHECK(res2.at("reject") == false);
    CHECK(res2.at("kappa") == 1e9);
    CHECK(json::parse(slurp(out2 + ".manifest.json")).at("inputs").size() == 1);

    // Cache present but the requested level was never calibrated.
    const RunConfig miss = msgd::parse_args({"detect", "--grid", gridfile, "--stat", "scan",
                                             "--cache", cache, "--alpha", "0.01"});
    CHECK_THROWS_WITH_AS(msgd::run(miss),
                         "cache miss: no calibration for this statistic at alpha=0.01",
                         std::runtime_error);

    const RunConfig nokap = msgd::parse_args({"detect", "--grid", gridfile, "--stat", "scan"});
    CHECK_THROWS_WITH_AS(msgd::run(nokap), "detect: need --kappa or --kappa-cache",
                         std::runtime_error);
}

TEST_CASE("power command writes the table and hashes its cache input") {
    TmpDir tmp;
    CoutSilencer quiet;
    const std::string cache = tmp.file("cache.json");
    const RunConfig cal = msgd::parse_args({"calibrate", "--dims", "4,4", "--stat", "scan",
                                            "--reps", "200", "--seed", "7", "--alpha", "0.1",
                                            "--cache", cache});
    REQUIRE(msgd::run(cal) == 0);

    const std::string out = tmp.file("power.csv");
    const RunConfig pow = msgd::parse_args({"power", "--dims", "4,4", "--stats", "scan",
                                            "--alpha", "0.1", "--reps", "100", "--seed", "3",
                                            "--cell", "k=2,mu=4", "--cache", cache, "--out",
                                            out});
    CHECK(msgd::run(pow) == 0);

    const std::string csv = slurp(out);
    REQUIRE(csv.rfind("k,mu,statistic,power,half_width,R\n", 0) == 0);
    std::stringstream rows(csv.substr(csv.find('\n') + 1));
    std::string k, mu, stat, power, hw, reps;
    std::getline(rows, k, ',');
    std::getline(rows, mu, ',');
    std::getline(rows, stat, ',');
    std::getline(rows, power, ',');
    std::getline(rows, hw, ',');
    std::getline(rows, reps);
    CHECK(k == "2");
    CHECK(mu == "4");
    CHECK(stat == "scan");
    CHECK(std::stod(power) >= 0.9);  // mean block statistic is 8, far past kappa
    CHECK(std::stod(power) <= 1.0);
    CHECK(reps == "100");

    const json pm = json::parse(slurp(out + ".manifest.json"));
    CHECK(pm.at("inputs").at(cache) == msgd::git_blob_sha1_file(cache));

    // Same table as json.
    const std::string jout = tmp.file("power.json");
    RunConfig powj = pow;
    powj.out = jout;
    powj.format = "json";
    CHECK(msgd::run(powj) == 0);
    const json arr = json::parse(slurp(jout));
    REQUIRE(arr.size() == 1);
    CHECK(arr[0].at("statistic") == "scan");
    CHECK(arr[0].at("R") == 100);
    CHECK(arr[0].at("power") == std::stod(power));

    // A statistic that was never calibrated cannot be compared.
    RunConfig missing = pow;
    missing.stats = {"alr"};
    CHECK_THROWS_WITH_AS(msgd::run(missing), "missing calibration", std::runtime_error);
}

TEST_CASE("null-ecdf artifacts are byte-identical across thread counts") {
    TmpDir tmp;
    CoutSilencer quiet;
    const std::string out = tmp.file("ecdf.csv");
    const std::string svg = tmp.file("ecdf.svg");

    RunConfig cfg = msgd::parse_args({"null-ecdf", "--dims", "3,3", "--stat", "alr", "--reps",
                                      "120", "--seed", "2", "--out", out, "--svg", svg});
    REQUIRE(msgd::run(cfg) == 0);
    const std::string csv1 = slurp(out);
    const std::string svg1 = slurp(svg);
    const std::string man1 = slurp(out + ".manifest.json");

    cfg.threads = 3;
    REQUIRE(msgd::run(cfg) == 0);
    CHECK(slurp(out) == csv1);
    CHECK(slurp(svg) == svg1);
    CHECK(slurp(out + ".manifest.json") == man1);

    REQUIRE(csv1.rfind("value,ecdf\n", 0) == 0);
    std::stringstream lines(csv1.substr(csv1.find('\n') + 1));
    std::string line;
    int n = 0;
    double prev = -1e300;
    std::string last_ecdf;
    while (std::getline(lines, line)) {
        const std::size_t comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        const double v = std::stod(line.substr(0, comma));
        CHECK(v >= prev);  // sorted null sample
        prev = v;
        last_ecdf = line.substr(comma + 1);
        ++n;
    }
    CHECK(n == 120);
    CHECK(last_ecdf == "1");

    const json em = json::parse(slurp(out + ".manifest.json"));
    CHECK(em.at("artifacts") == json::array({out, svg}));
}

TEST_CASE("packing-check writes the frozen sweep row") {
    TmpDir tmp;
    CoutSilencer quiet;
    const std::string out = tmp.file("packing.csv");
    const RunConfig cfg = msgd::parse_args({"packing-check", "--d", "1", "--deltas", "0.25",
                                            "--us", "0.5", "--res", "16", "--out", out});
    CHECK(msgd::run(cfg) == 0);
    CHECK(slurp(out) ==
          "delta,u,count,bound_ratio\n"
          "0.25,0.5,7,0.4375\n");

    RunConfig jcfg = cfg;
    jcfg.out = tmp.file("packing.json");
    jcfg.format = "json";
    CHECK(msgd::run(jcfg) == 0);
    const json arr = json::parse(slurp(jcfg.out));
    REQUIRE(arr.size() == 1);
    CHECK(arr[0].at("count") == 7);
    CHECK(arr[0].at("bound_ratio") == 0.4375);
}

TEST_CASE("vlt1 emits the growth table with plot and manifest") {
    TmpDir tmp;
    CoutSilencer quiet;
    const std::string out = tmp.file("vlt1.csv");
    const std::string svg = tmp.file("vlt1.svg");
    const RunConfig cfg =
        msgd::parse_args({"vlt1", "--d", "1", "--v", "0.5", "--m", "4,8", "--seeds", "5",
                          "--seed", "1", "--out", out, "--svg", svg});
    CHECK(msgd::run(cfg) == 0);

    const std::string csv = slurp(out);
    REQUIRE(csv.rfind("m,mean_stat,se,reference\n", 0) == 0);
    CHECK(count_substr(csv, "\n") == 3);  // header + two rows
    CHECK(csv.find("\n4,") != std::string::npos);
    CHECK(csv.find("\n8,") != std::string::npos);

    CHECK(count_substr(slurp(svg), "<polyline") == 2);  // mean and reference
    const json vm = json::parse(slurp(out + ".manifest.json"));
    CHECK(vm.at("artifacts") == json::array({out, svg}));
    CHECK(msgd::config_from_json(vm.at("config")) == cfg);
}

TEST_CASE("cli entry point reports errors and help through exit codes") {
    CoutSilencer quiet;
    std::vector<const char*> bad = {"msgd", "frobnicate"};
    CHECK(msgd::cli_main(static_cast<int>(bad.size()),
                         const_cast<char**>(bad.data())) == 1);
    std::vector<const char*> help = {"msgd", "--help"};
    CHECK(msgd::cli_main(static_cast<int>(help.size()),
                         const_cast<char**>(help.data())) == 0);
}
