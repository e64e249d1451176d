#include "msgd/cli.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "msgd/calibration.hpp"
#include "msgd/grid_io.hpp"
#include "msgd/svg.hpp"
#include "msgd/theory.hpp"

namespace msgd {

namespace {

using nlohmann::json;

// Thrown on --help so cli_main can print and exit 0.
struct CliHelp {
    std::string text;
};

// =============================================================================
// Config helpers
// =============================================================================

StatisticSpec make_stat_spec(const RunConfig& cfg, const std::string& name, int d) {
    StatisticSpec s;
    s.kind = parse_stat_kind(name);
    s.kernel = parse_kernel_spec(cfg.kernel, d);
    s.min_side = cfg.min_side;
    s.max_side = cfg.max_side;
    if (cfg.penalty_v_set) {
        if (s.kind == StatKind::Scan || s.kind == StatKind::ALR)
            throw std::invalid_argument("penalty not applicable");
        s.penalty = PenaltySpec{PenaltyVariant::GammaV, cfg.penalty_v};
    }
    if ((s.kind == StatKind::Scan || s.kind == StatKind::ALR) &&
        s.kernel.kind != KernelKind::Indicator)
        throw std::invalid_argument("indicator kernel required for scan/alr");
    return s;
}

PowerCellSpec parse_cell(const std::string& raw) {
    PowerCellSpec cell;
    bool have_k = false, have_mu = false;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        const std::size_t comma = std::min(raw.find(',', pos), raw.size());
        const std::string seg = raw.substr(pos, comma - pos);
        pos = comma + 1;
        const std::size_t eq = seg.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad cell spec: " + raw);
        const std::string key = seg.substr(0, eq);
        const std::string val = seg.substr(eq + 1);
        try {
            std::size_t used = 0;
            if (key == "k") {
                cell.k = std::stoi(val, &used);
                have_k = true;
            } else if (key == "mu") {
                cell.mu = std::stod(val, &used);
                have_mu = true;
            } else {
                throw std::invalid_argument("bad cell spec: " + raw);
            }
            if (used != val.size()) throw std::invalid_argument("bad cell spec: " + raw);
        } catch (const std::logic_error&) {
            throw std::invalid_argument("bad cell spec: " + raw);
        }
        if (comma == raw.size()) break;
    }
    if (!have_k || !have_mu || cell.k < 1)
        throw std::invalid_argument("bad cell spec: " + raw);
    return cell;
}

std::vector<std::string> effective_stats(const RunConfig& cfg) {
    if (!cfg.stats.empty()) return cfg.stats;
    return {"multiscale", "scan", "alr"};
}

bool needs_dims(const std::string& command) {
    return command == "calibrate" || command == "power" || command == "null-ecdf";
}

}  // namespace

// =============================================================================
// Serialization (threads deliberately excluded, see header)
// =============================================================================

json config_to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["dims"] = c.dims;
    j["stat"] = c.stat;
    j["stats"] = c.stats;
    j["kernel"] = c.kernel;
    j["penalty_v"] = c.penalty_v;
    j["penalty_v_set"] = c.penalty_v_set;
    j["alpha"] = c.alpha;
    j["alphas"] = c.alphas;
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    j["min_side"] = c.min_side;
    j["max_side"] = c.max_side;
    j["out"] = c.out;
    j["cache"] = c.cache;
    j["grid"] = c.grid;
    j["kappa"] = c.kappa;
    j["kappa_set"] = c.kappa_set;
    j["exit_code_signal"] = c.exit_code_signal;
    j["keep_sample"] = c.keep_sample;
    j["format"] = c.format;
    j["svg"] = c.svg;
    j["cells"] = c.cells;
    j["d"] = c.d;
    j["deltas"] = c.deltas;
    j["us"] = c.us;
    j["lattice_res"] = c.lattice_res;
    j["v"] = c.v;
    j["m_list"] = c.m_list;
    j["n_seeds"] = c.n_seeds;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.command = j.value("command", std::string());
    c.dims = j.value("dims", dims_t{});
    c.stat = j.value("stat", std::string("multiscale"));
    c.stats = j.value("stats", std::vector<std::string>{});
    c.kernel = j.value("kernel", std::string("indicator"));
    c.penalty_v = j.value("penalty_v", 1.0);
    c.penalty_v_set = j.value("penalty_v_set", false);
    c.alpha = j.value("alpha", 0.05);
    c.alphas = j.value("alphas", std::vector<double>{});
    c.reps = j.value("reps", 0);
    c.seed = j.value("seed", static_cast<std::uint64_t>(0));
    c.min_side = j.value("min_side", 0);
    c.max_side = j.value("max_side", 0);
    c.out = j.value("out", std::string());
    c.cache = j.value("cache", std::string());
    c.grid = j.value("grid", std::string());
    c.kappa = j.value("kappa", 0.0);
    c.kappa_set = j.value("kappa_set", false);
    c.exit_code_signal = j.value("exit_code_signal", false);
    c.keep_sample = j.value("keep_sample", false);
    c.format = j.value("format", std::string("csv"));
    c.svg = j.value("svg", std::string());
    c.cells = j.value("cells", std::vector<std::string>{});
    c.d = j.value("d", 2);
    c.deltas = j.value("deltas", std::vector<double>{1.0, 0.5, 0.25, 0.125});
    c.us = j.value("us", std::vector<double>{1.0, 0.5, 0.25});
    c.lattice_res = j.value("lattice_res", 128);
    c.v = j.value("v", 0.25);
    c.m_list = j.value("m_list", std::vector<int>{16, 64, 256});
    c.n_seeds = j.value("n_seeds", 50);
    return c;
}

bool RunConfig::operator==(const RunConfig& o) const {
    return config_to_json(*this) == config_to_json(o);
}

// =============================================================================
// Argument parsing
// =============================================================================

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    int d_flag = 0, m_flag = 0;
    dims_t dims_flag;

    CLI::App app{"signal detection on Gaussian grids: penalized multiscale, scan, and "
                 "average-likelihood-ratio statistics with Monte Carlo calibration"};
    app.name("msgd");
    app.require_subcommand(1);

    const auto add_grid_opts = [&](CLI::App* c) {
        c->add_option("--d", d_flag, "grid dimension (with --m)");
        c->add_option("--m", m_flag, "axis size for a square grid (d=2 unless --d is given)");
        c->add_option("--dims", dims_flag, "explicit axis sizes, e.g. 25,25")->delimiter(',');
    };
    const auto add_stat_opts = [&](CLI::App* c, bool single) {
        if (single) c->add_option("--stat", cfg.stat, "multiscale|multiscale-star|scan|alr");
        c->add_option("--kernel", cfg.kernel, "indicator | holder:<beta>");
        c->add_option("--penalty-v", cfg.penalty_v, "scale penalty constant V")
            ->each([&cfg](const std::string&) { cfg.penalty_v_set = true; });
        c->add_option("--min-side", cfg.min_side, "minimum per-axis side length");
        c->add_option("--max-side", cfg.max_side, "maximum per-axis side length (0 = none)");
    };
    const auto add_mc_opts = [&](CLI::App* c) {
        c->add_option("--reps", cfg.reps, "Monte Carlo replications");
        c->add_option("--seed", cfg.seed, "base RNG seed");
        c->add_option("--threads", cfg.threads, "worker thread cap (never changes results)");
    };
    const auto add_out_opts = [&](CLI::App* c) {
        c->add_option("--out", cfg.out, "primary output artifact path");
        c->add_option("--format", cfg.format, "table output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* cal = app.add_subcommand("calibrate", "simulate null critical values into a cache");
    add_grid_opts(cal);
    add_stat_opts(cal, true);
    add_mc_opts(cal);
    cal->add_option("--alpha", cfg.alpha, "significance level");
    cal->add_option("--alphas", cfg.alphas, "extra levels, e.g. 0.01,0.05,0.1")->delimiter(',');
    cal->add_option("--cache", cfg.cache, "calibration cache file (default msgd_cache.json)");
    cal->add_flag("--keep-sample", cfg.keep_sample, "store the sorted null sample in the cache");

    CLI::App* det = app.add_subcommand("detect", "test one grid file against kappa");
    det->add_option("--grid", cfg.grid, "input grid (.csv or binary)")->required();
    add_stat_opts(det, true);
    det->add_option("--alpha", cfg.alpha, "significance level for the cache lookup");
    det->add_option("--kappa", cfg.kappa, "explicit critical value (skips the cache)")
        ->each([&cfg](const std::string&) { cfg.kappa_set = true; });
    det->add_option("--kappa-cache,--cache", cfg.cache, "calibration cache file");
    det->add_option("--threads", cfg.threads, "worker thread cap (never changes results)");
    det->add_option("--out", cfg.out, "result JSON path (default detect.json)");
    det->add_flag("--exit-code-signal", cfg.exit_code_signal,
                  "exit with status 2 when the test rejects");

    CLI::App* pow = app.add_subcommand("power", "power table over signal cells");
    add_grid_opts(pow);
    add_stat_opts(pow, false);
    pow->add_option("--stats", cfg.stats, "statistics to compare (default multiscale,scan,alr)")
        ->delimiter(',');
    add_mc_opts(pow);
    pow->add_option("--alpha", cfg.alpha, "significance level");
    pow->add_option("--cell", cfg.cells, "signal cell, e.g. k=8,mu=0.4 (repeatable)");
    pow->add_option("--cache", cfg.cache, "calibration cache file with matching records");
    add_out_opts(pow);

    CLI::App* ecdf = app.add_subcommand("null-ecdf", "sorted null sample as CSV");
    add_grid_opts(ecdf);
    add_stat_opts(ecdf, true);
    add_mc_opts(ecdf);
    add_out_opts(ecdf);
    ecdf->add_option("--svg", cfg.svg, "also plot the ECDF to this SVG path");

    CLI::App* pack = app.add_subcommand("packing-check", "greedy packing sweep and bound ratios");
    pack->add_option("--d", cfg.d, "ambient dimension");
    pack->add_option("--deltas", cfg.deltas, "volume bounds")->delimiter(',');
    pack->add_option("--us", cfg.us, "radius factors")->delimiter(',');
    pack->add_option("--res", cfg.lattice_res, "center lattice resolution");
    add_out_opts(pack);

    CLI::App* vlt = app.add_subcommand("vlt1", "finest-scale growth for penalty constant v");
    vlt->add_option("--d", cfg.d, "ambient dimension");
    vlt->add_option("--v", cfg.v, "penalty constant in (0,1]");
    vlt->add_option("--m", cfg.m_list, "grid sizes, e.g. 16,64,256")->delimiter(',');
    vlt->add_option("--seeds", cfg.n_seeds, "number of replicate seeds");
    vlt->add_option("--seed", cfg.seed, "base RNG seed");
    vlt->add_option("--svg", cfg.svg, "also plot mean growth to this SVG path");
    add_out_opts(vlt);

    std::vector<const char*> argv;
    argv.push_back("msgd");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw CliHelp{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw CliHelp{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(e.what());
    }

    for (const char* name :
         {"calibrate", "detect", "power", "null-ecdf", "packing-check", "vlt1"})
        if (app.got_subcommand(name)) cfg.command = name;

    // Resolve grid dimensions.
    if (!dims_flag.empty()) {
        cfg.dims = dims_flag;
    } else if (m_flag > 0) {
        cfg.dims.assign(static_cast<std::size_t>(d_flag > 0 ? d_flag : 2), m_flag);
    }
    if (needs_dims(cfg.command)) {
        if (cfg.dims.empty())
            throw std::invalid_argument("missing grid dimensions: use --dims or --m [--d]");
        check_dims(cfg.dims);
    }
    if (cfg.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    if (cfg.reps < 0) throw std::invalid_argument("--reps must be positive");
    if (cfg.min_side < 0 || cfg.max_side < 0)
        throw std::invalid_argument("side bounds must be nonnegative");

    // Statistic validation (also rejects --penalty-v on pure-max statistics).
    // detect takes its dimension from the grid file, so validate with d=1.
    const int vd = cfg.dims.empty() ? 1 : static_cast<int>(cfg.dims.size());
    if (cfg.command == "calibrate" || cfg.command == "detect" || cfg.command == "null-ecdf")
        make_stat_spec(cfg, cfg.stat, vd);
    if (cfg.command == "power") {
        if (parse_kernel_spec(cfg.kernel, vd).kind != KernelKind::Indicator)
            throw std::invalid_argument("power comparison requires the indicator kernel");
        for (const auto& name : effective_stats(cfg)) make_stat_spec(cfg, name, vd);
        if (cfg.cells.empty())
            throw std::invalid_argument("power: need at least one --cell k=...,mu=...");
        for (const auto& cell : cfg.cells) parse_cell(cell);
    }
    if (cfg.command == "packing-check") {
        if (cfg.deltas.empty() || cfg.us.empty())
            throw std::invalid_argument("packing-check: --deltas and --us must be nonempty");
    }
    if (cfg.command == "vlt1" && cfg.m_list.empty())
        throw std::invalid_argument("vlt1: --m list must be nonempty");
    return cfg;
}

// =============================================================================
// Hashing and manifests
// =============================================================================

std::string git_blob_sha1(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size());
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("hash context allocation failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    // header.data() is NUL-terminated; include that byte
                    EVP_DigestUpdate(ctx, header.data(), header.size() + 1) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 computation failed");
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string git_blob_sha1_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input for hashing: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return git_blob_sha1(content);
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << content;
    if (!out) throw std::runtime_error("cannot write: " + path);
}

void write_manifest(const RunConfig& cfg, const std::string& primary,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& artifacts) {
    json m;
    m["command"] = cfg.command;
    m["config"] = config_to_json(cfg);
    json in = json::object();
    for (const auto& p : inputs) in[p] = git_blob_sha1_file(p);
    m["inputs"] = in;
    m["artifacts"] = artifacts;
    write_text_file(primary + ".manifest.json", m.dump(1) + "\n");
}

// Best cached record for (dims, spec) at level alpha: largest R, then
// smallest seed. Returns false when none qualifies.
bool pick_cached(const std::string& cache, const dims_t& dims, const StatisticSpec& spec,
                 double alpha, CalibrationRecord& out) {
    if (cache.empty()) return false;
    bool found = false;
    for (auto& rec : cache_find(cache, dims, spec.fingerprint_fields())) {
        if (!rec.quantiles.count(alpha)) continue;
        if (!found || rec.key.replications > out.key.replications ||
            (rec.key.replications == out.key.replications && rec.key.seed < out.key.seed)) {
            out = std::move(rec);
            found = true;
        }
    }
    return found;
}

// =============================================================================
// Command implementations
// =============================================================================

int run_calibrate(const RunConfig& cfg) {
    const StatisticSpec spec =
        make_stat_spec(cfg, cfg.stat, static_cast<int>(cfg.dims.size()));
    std::vector<double> levels = cfg.alphas;
    if (levels.empty()) levels.push_back(cfg.alpha);
    const int R = cfg.reps > 0 ? cfg.reps : 3000;
    const std::string cache = cfg.cache.empty() ? "msgd_cache.json" : cfg.cache;

    const CalibrationRecord rec =
        calibrate(cfg.dims, spec, levels, R, cfg.seed, cfg.threads, cfg.keep_sample);
    cache_store(cache, rec);

    std::cout << "calibrated " << spec.kind_string() << " on dims=(" << join_ints(cfg.dims)
              << "), R=" << R << ", seed=" << cfg.seed << "\n";
    for (const auto& [a, k] : rec.quantiles)
        std::cout << "  kappa(alpha=" << dbl_str(a) << ") = " << dbl_str(k) << "\n";
    std::cout << "cache: " << cache << " [" << rec.key.fingerprint() << "]\n";

    write_manifest(cfg, cache, {}, {cache});
    return 0;
}

int run_detect(const RunConfig& cfg) {
    const GridField grid = read_grid_auto(cfg.grid);
    const StatisticSpec spec = make_stat_spec(cfg, cfg.stat, grid.d());

    double kap = cfg.kappa;
    std::vector<std::string> inputs{cfg.grid};
    if (!cfg.kappa_set) {
        CalibrationRecord rec;
        if (!pick_cached(cfg.cache, grid.dims, spec, cfg.alpha, rec)) {
            if (cfg.cache.empty())
                throw std::runtime_error("detect: need --kappa or --kappa-cache");
            throw std::runtime_error("cache miss: no calibration for this statistic at alpha=" +
                                     dbl_str(cfg.alpha));
        }
        kap = rec.quantiles.at(cfg.alpha);
        inputs.push_back(cfg.cache);
    }

    const DetectionResult res = evaluate(grid, spec, cfg.threads, false);
    const bool reject = res.value > kap;

    std::cout << "statistic: " << spec.kind_string() << "\n"
              << "value: " << dbl_str(res.value) << "\n"
              << "kappa: " << dbl_str(kap) << " (alpha=" << dbl_str(cfg.alpha) << ")\n"
              << "decision: " << (reject ? "reject" : "retain") << "\n"
              << "argmax: lo=(" << join_ints(res.argmax_rect.lo) << ") hi=("
              << join_ints(res.argmax_rect.hi) << ")\n"
              << "rectangles: " << res.rect_count << "\n";

    const std::string out = cfg.out.empty() ? "detect.json" : cfg.out;
    json j;
    j["statistic"] = spec.kind_string();
    j["value"] = res.value;
    j["kappa"] = kap;
    j["alpha"] = cfg.alpha;
    j["reject"] = reject;
    j["argmax_lo"] = res.argmax_rect.lo;
    j["argmax_hi"] = res.argmax_rect.hi;
    j["rect_count"] = res.rect_count;
    write_text_file(out, j.dump(1) + "\n");
    write_manifest(cfg, out, inputs, {out});

    return (reject && cfg.exit_code_signal) ? 2 : 0;
}

int run_power(const RunConfig& cfg) {
    const int R = cfg.reps > 0 ? cfg.reps : 1000;
    const std::vector<std::string> stat_names = effective_stats(cfg);

    std::vector<StatisticSpec> specs;
    std::vector<CalibrationRecord> records;
    for (const auto& name : stat_names) {
        StatisticSpec spec = make_stat_spec(cfg, name, static_cast<int>(cfg.dims.size()));
        CalibrationRecord rec;
        if (!pick_cached(cfg.cache, cfg.dims, spec, cfg.alpha, rec))
            throw std::runtime_error("missing calibration");
        specs.push_back(std::move(spec));
        records.push_back(std::move(rec));
    }

    std::vector<PowerCellSpec> cells;
    for (const auto& raw : cfg.cells) cells.push_back(parse_cell(raw));

    const std::vector<PowerRow> rows =
        compare_tests(cfg.dims, cells, specs, records, cfg.alpha, R, cfg.seed, cfg.threads);

    const std::string out = cfg.out.empty() ? "power.csv" : cfg.out;
    if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back(json{{"k", r.k},
                               {"mu", r.mu},
                               {"statistic", r.statistic},
                               {"power", r.power},
                               {"half_width", r.half_width},
                               {"R", r.replications}});
        write_text_file(out, arr.dump(1) + "\n");
    } else {
        write_text_file(out, power_rows_csv(rows));
    }
    std::cout << power_rows_csv(rows);
    write_manifest(cfg, out, {cfg.cache}, {out});
    return 0;
}

int run_null_ecdf(const RunConfig& cfg) {
    const StatisticSpec spec =
        make_stat_spec(cfg, cfg.stat, static_cast<int>(cfg.dims.size()));
    const int R = cfg.reps > 0 ? cfg.reps : 3000;
    const std::vector<double> sample = null_ecdf(cfg.dims, spec, R, cfg.seed, cfg.threads);

    const std::string out = cfg.out.empty() ? "ecdf.csv" : cfg.out;
    std::vector<std::string> artifacts{out};
    if (cfg.format == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < sample.size(); ++i)
            arr.push_back(json{{"value", sample[i]},
                               {"ecdf", static_cast<double>(i + 1) / static_cast<double>(R)}});
        write_text_file(out, arr.dump(1) + "\n");
    } else {
        std::string csv = "value,ecdf\n";
        for (std::size_t i = 0; i < sample.size(); ++i) {
            csv += dbl_str(sample[i]);
            csv += ',';
            csv += dbl_str(static_cast<double>(i + 1) / static_cast<double>(R));
            csv += '\n';
        }
        write_text_file(out, csv);
    }

    if (!cfg.svg.empty()) {
        Series s;
        s.name = "m=" + join_ints(cfg.dims, 'x');
        for (std::size_t i = 0; i < sample.size(); ++i)
            s.pts.emplace_back(sample[i], static_cast<double>(i + 1) / static_cast<double>(R));
        emit_svg({s}, cfg.svg);
        artifacts.push_back(cfg.svg);
    }
    write_manifest(cfg, out, {}, artifacts);
    return 0;
}

int run_packing_check(const RunConfig& cfg) {
    const std::vector<PackingResult> results =
        packing_bound_sweep(cfg.d, cfg.deltas, cfg.us, cfg.lattice_res);
    bool all_valid = true;
    for (const auto& r : results) all_valid = all_valid && packing_pairwise_valid(r);

    const std::string out = cfg.out.empty() ? "packing.csv" : cfg.out;
    if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& r : results)
            arr.push_back(json{{"delta", r.delta},
                               {"u", r.u},
                               {"count", r.count},
                               {"bound_ratio", r.bound_ratio}});
        write_text_file(out, arr.dump(1) + "\n");
    } else {
        write_text_file(out, packing_results_csv(results));
    }
    std::cout << packing_results_csv(results);
    std::cout << "pairwise validity: " << (all_valid ? "ok" : "VIOLATED") << "\n";
    write_manifest(cfg, out, {}, {out});
    if (!all_valid) throw std::logic_error("greedy packing produced an invalid pair");
    return 0;
}

int run_vlt1(const RunConfig& cfg) {
    const std::vector<DivergenceRow> rows =
        v_less_one_divergence(cfg.d, cfg.v, cfg.m_list, cfg.n_seeds, cfg.seed);

    const std::string out = cfg.out.empty() ? "vlt1.csv" : cfg.out;
    std::vector<std::string> artifacts{out};
    if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back(json{{"m", r.m},
                               {"mean_stat", r.mean_stat},
                               {"se", r.se},
                               {"reference", r.reference}});
        write_text_file(out, arr.dump(1) + "\n");
    } else {
        write_text_file(out, divergence_rows_csv(rows));
    }
    std::cout << divergence_rows_csv(rows);

    if (!cfg.svg.empty()) {
        Series mean_s, ref_s;
        mean_s.name = "mean";
        ref_s.name = "reference";
        for (const auto& r : rows) {
            mean_s.pts.emplace_back(static_cast<double>(r.m), r.mean_stat);
            ref_s.pts.emplace_back(static_cast<double>(r.m), r.reference);
        }
        emit_svg({mean_s, ref_s}, cfg.svg);
        artifacts.push_back(cfg.svg);
    }
    write_manifest(cfg, out, {}, artifacts);
    return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
    if (cfg.command == "calibrate") return run_calibrate(cfg);
    if (cfg.command == "detect") return run_detect(cfg);
    if (cfg.command == "power") return run_power(cfg);
    if (cfg.command == "null-ecdf") return run_null_ecdf(cfg);
    if (cfg.command == "packing-check") return run_packing_check(cfg);
    if (cfg.command == "vlt1") return run_vlt1(cfg);
    throw std::invalid_argument("unknown command: " + cfg.command);
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 1 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const CliHelp& h) {
        std::cout << h.text;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "msgd: " << e.what() << "\n";
        return 1;
    }
    try {
        return run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "msgd: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace msgd
