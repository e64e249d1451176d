#pragma once

// Monte Carlo critical values, null ECDFs, the power harness, and the
// persistent calibration cache.
//
// Reproducibility contract: replication r always uses RNG stream r, results
// land in a slot table indexed by r and are reduced sequentially, so every
// number produced here is independent of the worker count.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msgd/simulation.hpp"
#include "msgd/statistics.hpp"

namespace msgd {

// =============================================================================
// Calibration keys
// =============================================================================

// Everything the null distribution of a statistic depends on. The canonical
// string pins the rectangle family and scale-fraction convention as well, so
// cached quantiles can never be replayed against a different enumeration.
struct CalibKey {
    dims_t dims;
    std::string stat_fields;  // StatisticSpec::fingerprint_fields()
    int replications = 0;
    std::uint64_t seed = 0;

    std::string canonical_string() const;
    std::string fingerprint() const;  // 16 hex digits, FNV-1a 64 of canonical_string()

    bool operator==(const CalibKey& o) const {
        return dims == o.dims && stat_fields == o.stat_fields &&
               replications == o.replications && seed == o.seed;
    }
};

CalibKey make_calib_key(const dims_t& dims, const StatisticSpec& spec, int replications,
                        std::uint64_t seed);

struct CalibrationRecord {
    CalibKey key;
    std::map<double, double> quantiles;  // alpha -> kappa_hat
    std::vector<double> ecdf_sample;     // sorted null sample; empty when not kept

    // kappa for a level stored in `quantiles`; throws on a missing level.
    double kappa(double alpha) const;
};

// =============================================================================
// Monte Carlo estimation
// =============================================================================

// R null grids on streams 0..R-1; kappa_hat(alpha) is the ceil((1-alpha) R)-th
// order statistic of the simulated values (upper order statistic, so the
// attained level is at most alpha up to MC error). Requires R >= 100 and
// alpha*R >= 5 for every requested level.
CalibrationRecord calibrate(const dims_t& dims, const StatisticSpec& spec,
                            const std::vector<double>& alpha_levels, int replications,
                            std::uint64_t seed, int threads = 1, bool keep_sample = false);

// Same null grids evaluated once for several statistics (single enumeration
// pass per grid). Each returned record is bit-identical to the corresponding
// single-statistic calibrate() call. All specs must use the indicator kernel
// and share scale bounds.
std::vector<CalibrationRecord> calibrate_multi(const dims_t& dims,
                                               const std::vector<StatisticSpec>& specs,
                                               const std::vector<double>& alpha_levels,
                                               int replications, std::uint64_t seed,
                                               int threads = 1, bool keep_sample = false);

// Sorted null sample for ECDF plotting/export. Requires R >= 100.
std::vector<double> null_ecdf(const dims_t& dims, const StatisticSpec& spec, int replications,
                              std::uint64_t seed, int threads = 1);

struct PowerCell {
    double power = 0.0;
    double half_width = 0.0;  // 1.96 * sqrt(p (1-p) / R)
    int replications = 0;
};

// Fraction of R alternative replications (noise stream r plus the signal)
// whose statistic value strictly exceeds kappa.
PowerCell power(const dims_t& dims, const StatisticSpec& spec, const SignalSpec& sig, double kappa,
                int replications, std::uint64_t seed, int threads = 1);

// As above, but takes the calibration record and a level; throws
// "calibration key mismatch" unless the record was calibrated for this
// (dims, spec) pair.
PowerCell power_calibrated(const dims_t& dims, const StatisticSpec& spec, const SignalSpec& sig,
                           const CalibrationRecord& calib, double alpha, int replications,
                           std::uint64_t seed, int threads = 1);

// =============================================================================
// Power comparison tables
// =============================================================================

struct PowerCellSpec {
    int k = 1;        // signal block side length (lattice units)
    double mu = 0.0;  // per-cell amplitude
};

struct PowerRow {
    int k = 0;
    double mu = 0.0;
    std::string statistic;
    double power = 0.0;
    double half_width = 0.0;
    int replications = 0;
};

// Power of several statistics over a grid of (k, mu) signal cells. The signal
// is the k^d block anchored at index (1,...,1); all statistics are evaluated
// on the same replications via a single enumeration pass. Calibration records
// for every spec (matching dims and statistic fingerprint, quantile at
// `alpha`) must be present in `calibs`, otherwise: "missing calibration".
std::vector<PowerRow> compare_tests(const dims_t& dims, const std::vector<PowerCellSpec>& cells,
                                    const std::vector<StatisticSpec>& specs,
                                    const std::vector<CalibrationRecord>& calibs, double alpha,
                                    int replications, std::uint64_t seed, int threads = 1);

std::string power_rows_csv(const std::vector<PowerRow>& rows);  // header k,mu,statistic,...

// =============================================================================
// Persistent cache
// =============================================================================
//
// One JSON document per cache file: a top-level object mapping the key
// fingerprint to {key fields, canonical string, quantiles, optional sample}.
// Doubles are serialized with shortest round-trip precision, so a record
// survives store/load bit-exactly.

// Inserts or replaces the record's entry; other entries are preserved.
void cache_store(const std::string& path, const CalibrationRecord& record);

// nullopt when the file or the fingerprint entry is absent (a cache miss).
// Throws "calibration cache fingerprint mismatch" when an entry is found but
// its stored key does not hash back to its map slot or disagrees with the
// requested key, and "corrupt calibration cache" on unparseable files.
std::optional<CalibrationRecord> cache_load(const std::string& path, const CalibKey& key);

// Fingerprint-only lookup used by the CLI when the key parameters (R, seed)
// of the cached record are not known in advance: returns every record whose
// statistic fields and dims match.
std::vector<CalibrationRecord> cache_find(const std::string& path, const dims_t& dims,
                                          const std::string& stat_fields);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace msgd
