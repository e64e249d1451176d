#include "msgd/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "msgd/parallel.hpp"

namespace msgd {

// =============================================================================
// Keys and fingerprints
// =============================================================================

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string CalibKey::canonical_string() const {
    std::string out = "d=" + std::to_string(dims.size());
    out += ";dims=" + join_ints(dims);
    out += ";" + stat_fields;
    out += ";R=" + std::to_string(replications);
    out += ";seed=" + std::to_string(seed);
    // Pin the enumeration conventions the quantiles were computed under.
    out += ";family=all-index-ranges;r=point-fraction";
    return out;
}

std::string CalibKey::fingerprint() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_string())));
    return std::string(buf);
}

CalibKey make_calib_key(const dims_t& dims, const StatisticSpec& spec, int replications,
                        std::uint64_t seed) {
    check_dims(dims);
    return CalibKey{dims, spec.fingerprint_fields(), replications, seed};
}

double CalibrationRecord::kappa(double alpha) const {
    const auto it = quantiles.find(alpha);
    if (it == quantiles.end()) throw std::invalid_argument("missing calibration level");
    return it->second;
}

// =============================================================================
// Null simulation
// =============================================================================

namespace {

// Order-statistic index for the (1-alpha) empirical quantile:
// ceil((1-alpha) R) = R - floor(alpha R). The epsilon guards against the
// product landing one ulp under an exact integer.
int quantile_index(double alpha, int R) {
    return R - static_cast<int>(std::floor(alpha * static_cast<double>(R) + 1e-9));
}

void check_levels(const std::vector<double>& alphas, int R) {
    if (R < 100) throw std::invalid_argument("insufficient R for requested alpha");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha outside (0,1)");
        if (a * static_cast<double>(R) < 5.0 - 1e-9)
            throw std::invalid_argument("insufficient R for requested alpha");
    }
}

// values[s][r] = statistic s on null grid with stream r.
std::vector<std::vector<double>> simulate_null(const dims_t& dims,
                                               const std::vector<StatisticSpec>& specs,
                                               int replications, std::uint64_t seed, int threads) {
    std::vector<std::vector<double>> values(specs.size());
    for (auto& v : values) v.assign(static_cast<std::size_t>(replications), 0.0);
    run_chunks(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
        const GridField g = gaussian_grid(dims, RngSpec{seed, static_cast<std::uint64_t>(r)});
        if (specs.size() == 1) {
            // evaluate() also covers the non-indicator slow path
            values[0][r] = evaluate(g, specs[0], 1, false).value;
        } else {
            const auto res = evaluate_bundle(g, specs, 1, false);
            for (std::size_t s = 0; s < specs.size(); ++s) values[s][r] = res[s].value;
        }
    });
    return values;
}

CalibrationRecord record_from_sample(const dims_t& dims, const StatisticSpec& spec,
                                     const std::vector<double>& alphas, int replications,
                                     std::uint64_t seed, std::vector<double> sorted,
                                     bool keep_sample) {
    std::sort(sorted.begin(), sorted.end());
    CalibrationRecord rec;
    rec.key = make_calib_key(dims, spec, replications, seed);
    for (double a : alphas) rec.quantiles[a] = sorted[quantile_index(a, replications) - 1];
    if (keep_sample) rec.ecdf_sample = std::move(sorted);
    return rec;
}

}  // namespace

CalibrationRecord calibrate(const dims_t& dims, const StatisticSpec& spec,
                            const std::vector<double>& alpha_levels, int replications,
                            std::uint64_t seed, int threads, bool keep_sample) {
    return calibrate_multi(dims, {spec}, alpha_levels, replications, seed, threads,
                           keep_sample)[0];
}

std::vector<CalibrationRecord> calibrate_multi(const dims_t& dims,
                                               const std::vector<StatisticSpec>& specs,
                                               const std::vector<double>& alpha_levels,
                                               int replications, std::uint64_t seed, int threads,
                                               bool keep_sample) {
    check_levels(alpha_levels, replications);
    const auto values = simulate_null(dims, specs, replications, seed, threads);
    std::vector<CalibrationRecord> out;
    out.reserve(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s)
        out.push_back(record_from_sample(dims, specs[s], alpha_levels, replications, seed,
                                         values[s], keep_sample));
    return out;
}

std::vector<double> null_ecdf(const dims_t& dims, const StatisticSpec& spec, int replications,
                              std::uint64_t seed, int threads) {
    if (replications < 100) throw std::invalid_argument("insufficient R for requested alpha");
    auto values = simulate_null(dims, {spec}, replications, seed, threads);
    std::sort(values[0].begin(), values[0].end());
    return std::move(values[0]);
}

// =============================================================================
// Power
// =============================================================================

namespace {

PowerCell cell_from_counts(std::uint64_t rejections, int R) {
    PowerCell c;
    c.replications = R;
    c.power = static_cast<double>(rejections) / static_cast<double>(R);
    c.half_width = 1.96 * std::sqrt(c.power * (1.0 - c.power) / static_cast<double>(R));
    return c;
}

}  // namespace

PowerCell power(const dims_t& dims, const StatisticSpec& spec, const SignalSpec& sig, double kappa,
                int replications, std::uint64_t seed, int threads) {
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    signal_grid(dims, sig);  // validate the signal against dims before spawning workers
    std::vector<double> values(static_cast<std::size_t>(replications), 0.0);
    run_chunks(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
        const GridField obs =
            observed_grid(dims, sig, RngSpec{seed, static_cast<std::uint64_t>(r)});
        values[r] = evaluate(obs, spec, 1, false).value;
    });
    std::uint64_t rej = 0;
    for (double v : values) rej += v > kappa ? 1 : 0;
    return cell_from_counts(rej, replications);
}

PowerCell power_calibrated(const dims_t& dims, const StatisticSpec& spec, const SignalSpec& sig,
                           const CalibrationRecord& calib, double alpha, int replications,
                           std::uint64_t seed, int threads) {
    const CalibKey expected =
        make_calib_key(dims, spec, calib.key.replications, calib.key.seed);
    if (!(expected == calib.key)) throw std::invalid_argument("calibration key mismatch");
    return power(dims, spec, sig, calib.kappa(alpha), replications, seed, threads);
}

std::vector<PowerRow> compare_tests(const dims_t& dims, const std::vector<PowerCellSpec>& cells,
                                    const std::vector<StatisticSpec>& specs,
                                    const std::vector<CalibrationRecord>& calibs, double alpha,
                                    int replications, std::uint64_t seed, int threads) {
    check_dims(dims);
    if (specs.empty() || cells.empty())
        throw std::invalid_argument("compare_tests: need at least one statistic and one cell");

    // Resolve a kappa per statistic up front.
    std::vector<double> kappas(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const std::string fields = specs[s].fingerprint_fields();
        bool found = false;
        for (const auto& rec : calibs) {
            if (rec.key.dims == dims && rec.key.stat_fields == fields &&
                rec.quantiles.count(alpha)) {
                kappas[s] = rec.quantiles.at(alpha);
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("missing calibration");
    }

    std::vector<PowerRow> rows;
    for (const auto& cell : cells) {
        for (int m : dims)
            if (cell.k < 1 || cell.k > m)
                throw std::invalid_argument("signal block exceeds grid");
        std::vector<int> lo(dims.size(), 1), hi(dims.size(), cell.k);
        const SignalSpec sig = SignalSpec::rect_signal(cell.mu, Rect{lo, hi});

        std::vector<std::vector<double>> values(specs.size());
        for (auto& v : values) v.assign(static_cast<std::size_t>(replications), 0.0);
        run_chunks(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
            const GridField obs =
                observed_grid(dims, sig, RngSpec{seed, static_cast<std::uint64_t>(r)});
            const auto res = evaluate_bundle(obs, specs, 1, false);
            for (std::size_t s = 0; s < specs.size(); ++s) values[s][r] = res[s].value;
        });

        for (std::size_t s = 0; s < specs.size(); ++s) {
            std::uint64_t rej = 0;
            for (double v : values[s]) rej += v > kappas[s] ? 1 : 0;
            const PowerCell pc = cell_from_counts(rej, replications);
            rows.push_back(PowerRow{cell.k, cell.mu, specs[s].kind_string(), pc.power,
                                    pc.half_width, pc.replications});
        }
    }
    return rows;
}

std::string power_rows_csv(const std::vector<PowerRow>& rows) {
    std::string out = "k,mu,statistic,power,half_width,R\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k);
        out += ',';
        out += dbl_str(r.mu);
        out += ',';
        out += r.statistic;
        out += ',';
        out += dbl_str(r.power);
        out += ',';
        out += dbl_str(r.half_width);
        out += ',';
        out += std::to_string(r.replications);
        out += '\n';
    }
    return out;
}

// =============================================================================
// Cache
// =============================================================================

namespace {

using nlohmann::json;

json load_cache_file(const std::string& path, bool missing_ok) {
    std::ifstream in(path);
    if (!in) {
        if (missing_ok) return json::object();
        throw std::runtime_error("cannot open calibration cache: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        throw std::runtime_error("corrupt calibration cache: " + path);
    }
    if (!j.is_object()) throw std::runtime_error("corrupt calibration cache: " + path);
    return j;
}

json record_to_json(const CalibrationRecord& rec) {
    json jk;
    jk["d"] = rec.key.dims.size();
    jk["dims"] = rec.key.dims;
    jk["stat"] = rec.key.stat_fields;
    jk["R"] = rec.key.replications;
    jk["seed"] = rec.key.seed;
    json q = json::array();
    for (const auto& [a, k] : rec.quantiles) q.push_back(json::array({a, k}));
    json entry;
    entry["key"] = jk;
    entry["canonical"] = rec.key.canonical_string();
    entry["quantiles"] = q;
    if (!rec.ecdf_sample.empty()) entry["sample"] = rec.ecdf_sample;
    return entry;
}

// Rebuilds the record and verifies that the stored key fields, the stored
// canonical string, and the map slot all agree.
CalibrationRecord record_from_json(const std::string& slot, const json& entry) {
    try {
        CalibrationRecord rec;
        const json& jk = entry.at("key");
        rec.key.dims = jk.at("dims").get<dims_t>();
        rec.key.stat_fields = jk.at("stat").get<std::string>();
        rec.key.replications = jk.at("R").get<int>();
        rec.key.seed = jk.at("seed").get<std::uint64_t>();
        const std::string canonical = entry.at("canonical").get<std::string>();
        if (canonical != rec.key.canonical_string() || rec.key.fingerprint() != slot)
            throw std::runtime_error("calibration cache fingerprint mismatch");
        for (const auto& pair : entry.at("quantiles"))
            rec.quantiles[pair.at(0).get<double>()] = pair.at(1).get<double>();
        if (entry.contains("sample")) rec.ecdf_sample = entry.at("sample").get<std::vector<double>>();
        return rec;
    } catch (const json::exception&) {
        throw std::runtime_error("corrupt calibration cache entry");
    }
}

}  // namespace

void cache_store(const std::string& path, const CalibrationRecord& record) {
    json j = load_cache_file(path, /*missing_ok=*/true);
    j[record.key.fingerprint()] = record_to_json(record);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write calibration cache: " + path);
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("cannot write calibration cache: " + path);
}

std::optional<CalibrationRecord> cache_load(const std::string& path, const CalibKey& key) {
    std::ifstream probe(path);
    if (!probe) return std::nullopt;
    probe.close();
    const json j = load_cache_file(path, /*missing_ok=*/false);
    const std::string fp = key.fingerprint();
    if (!j.contains(fp)) return std::nullopt;
    CalibrationRecord rec = record_from_json(fp, j.at(fp));
    if (!(rec.key == key)) throw std::runtime_error("calibration cache fingerprint mismatch");
    return rec;
}

std::vector<CalibrationRecord> cache_find(const std::string& path, const dims_t& dims,
                                          const std::string& stat_fields) {
    std::ifstream probe(path);
    if (!probe) return {};
    probe.close();
    const json j = load_cache_file(path, /*missing_ok=*/false);
    std::vector<CalibrationRecord> out;
    for (const auto& [slot, entry] : j.items()) {
        CalibrationRecord rec = record_from_json(slot, entry);
        if (rec.key.dims == dims && rec.key.stat_fields == stat_fields)
            out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace msgd
