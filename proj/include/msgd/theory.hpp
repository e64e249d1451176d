#pragma once

// Empirical checks of the structural results behind the statistics: a greedy
// packing witness for the scale-space covering bound, and the divergence of
// the finest-scale penalized maximum when the penalty constant V drops
// below 1.

#include <cstdint>
#include <vector>

#include "msgd/nd.hpp"

namespace msgd {

// =============================================================================
// Boxes in scale space
// =============================================================================

// An axis-aligned box B(t,h) = prod_k [t_k - h_k, t_k + h_k] inside the unit
// cube: h in (0, 1/2]^d and t in A_h = prod [h_k, 1 - h_k].
struct BoxParam {
    std::vector<double> t;
    std::vector<double> h;

    double volume() const;  // sigma^2(t,h) = 2^d prod h_k
};

// Validating factory; throws on empty rank, mismatched ranks, h outside
// (0, 1/2], or t outside A_h.
BoxParam make_box(const std::vector<double>& t, const std::vector<double>& h);

// Symmetric-difference pseudometric:
// rho(a,b) = sqrt(|B_a| + |B_b| - 2 |B_a intersect B_b|), the intersection
// volume computed per axis in closed form.
double sym_diff_rho(const BoxParam& a, const BoxParam& b);

// =============================================================================
// Greedy packing
// =============================================================================

struct PackingResult {
    double delta = 0.0;
    double u = 0.0;
    std::uint64_t count = 0;      // N: number of boxes selected
    double bound_ratio = 0.0;     // N u^{2d} delta / (log(e/delta))^{d-1}
    std::vector<BoxParam> selected;
};

// Enumerates boxes with sigma^2 <= delta on a finite lattice (t uniform with
// lattice_res steps per axis intersected with A_h; h dyadic 2^{-1}..2^{-L}
// with L = floor(log2(lattice_res))) and greedily keeps every candidate, in
// lexicographic scan order, whose rho-distance to all kept boxes exceeds
// sqrt(u delta). The result is a maximal packing, hence a lower-bound witness
// for the packing number at radius sqrt(u delta). Requires lattice_res >= 8
// and delta, u in (0,1]. An empty candidate set reports count = 0.
PackingResult greedy_packing(int d, double delta, double u, int lattice_res);

// Same candidates scanned in reverse order; an independent maximal packing
// used as a cross-check oracle (counts agree within a constant factor).
PackingResult greedy_packing_reversed(int d, double delta, double u, int lattice_res);

// Cartesian sweep over (delta, u) cells.
std::vector<PackingResult> packing_bound_sweep(int d, const std::vector<double>& deltas,
                                               const std::vector<double>& us, int lattice_res);

// Re-verifies that every selected pair satisfies rho > sqrt(u delta).
bool packing_pairwise_valid(const PackingResult& r);

// =============================================================================
// Finest-scale divergence for V < 1
// =============================================================================

struct DivergenceRow {
    int m = 0;
    double mean_stat = 0.0;  // mean over seeds of max_{cells} |psi_hat| - Gamma_V(m^{-d})
    double se = 0.0;         // standard error of that mean
    double reference = 0.0;  // (1 - sqrt(v)) sqrt(2 d log m)
};

// For each m in m_list, simulates n_seeds independent grids of m^d standard
// normals (the finest disjoint cells, whose local averages are exactly iid
// N(0,1)), and averages max |psi_hat| - Gamma_V(m^{-d}).
//
// Accepts v in (0,1]: v < 1 is the divergence regime, and v = 1 is the
// boundary case kept so callers can contrast bounded against divergent
// growth. v > 1 (or v <= 0) throws "not in divergence regime".
std::vector<DivergenceRow> v_less_one_divergence(int d, double v, const std::vector<int>& m_list,
                                                 int n_seeds, std::uint64_t seed);

std::string divergence_rows_csv(const std::vector<DivergenceRow>& rows);
std::string packing_results_csv(const std::vector<PackingResult>& results);

}  // namespace msgd
