#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msgd/grid.hpp"
#include "msgd/kernels.hpp"
#include "msgd/penalties.hpp"

namespace msgd {

// =============================================================================
// Test statistics over the rectangle family.
//
//   Psi_hat(B) = rect_sum(B) / sqrt(point_count(B))        (unit null variance)
//   multiscale      T  = max_B (|Psi_hat| - Gamma(r(B))) / D(r(B))
//   multiscale-star T* = max_B (|Psi_hat| - Gamma_V(r(B)))          (no D)
//   scan            Mn = max_B |Psi_hat|
//   alr        log An  = logsumexp_B(Psi_hat^2 / 2) - log(family size)
//
// r(B) is the point fraction. The multiscale kinds under a GammaV penalty
// drop the D divisor (D applies to the Standard penalty only).
// =============================================================================

enum class StatKind { Multiscale, MultiscaleStar, Scan, ALR };

struct StatisticSpec {
    StatKind kind = StatKind::Multiscale;
    PenaltySpec penalty;  // multiscale kinds only
    Kernel kernel = Kernel::indicator(2);
    int min_side = 0;  // 0 = unbounded
    int max_side = 0;

    ScaleFilter filter() const { return side_bounds_filter(min_side, max_side); }
    bool penalized() const { return kind == StatKind::Multiscale || kind == StatKind::MultiscaleStar; }
    // Canonical CLI token for the kind.
    std::string kind_string() const;
    // Fingerprint text used in calibration cache keys (excludes dims/R/seed).
    std::string fingerprint_fields() const;
};

StatKind parse_stat_kind(const std::string& s);

struct DetectionResult {
    double value = 0.0;
    Rect argmax_rect;  // first maximizer in canonical enumeration order
    std::optional<std::map<std::vector<int>, double>> per_scale_max;
    std::uint64_t rect_count = 0;
};

// ---- Elementary statistics ----
double psi_hat_rect(const PrefixTable& table, const Rect& rect);
double psi_hat_kernel(const GridField& grid, const ScaledKernel& sk);

// ---- Full-family statistics ----
// `threads` bounds worker parallelism; results are bit-identical for any value.
DetectionResult multiscale_T(const GridField& grid, const StatisticSpec& spec, int threads = 1,
                             bool want_per_scale = false);
DetectionResult multiscale_T_star(const GridField& grid, const StatisticSpec& spec, int threads = 1,
                                  bool want_per_scale = false);
DetectionResult scan_Mn(const GridField& grid, const StatisticSpec& spec, int threads = 1,
                        bool want_per_scale = false);
DetectionResult alr_An(const GridField& grid, const StatisticSpec& spec, int threads = 1,
                       bool want_per_scale = false);

// Dispatch over spec.kind; identical to calling the functions above.
DetectionResult evaluate(const GridField& grid, const StatisticSpec& spec, int threads = 1,
                         bool want_per_scale = false);

// Evaluates several statistics over one grid in a single enumeration pass.
// All specs must share the indicator kernel and identical side bounds.
// Results are identical to evaluating each spec individually.
std::vector<DetectionResult> evaluate_bundle(const GridField& grid,
                                             const std::vector<StatisticSpec>& specs, int threads = 1,
                                             bool want_per_scale = false);

}  // namespace msgd
