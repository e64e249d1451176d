#include "msgd/theory.hpp"

#include <algorithm>
#include <cmath>

#include "msgd/penalties.hpp"
#include "msgd/simulation.hpp"

namespace msgd {

// =============================================================================
// Boxes and the symmetric-difference metric
// =============================================================================

double BoxParam::volume() const {
    double v = 1.0;
    for (double hk : h) v *= 2.0 * hk;
    return v;
}

BoxParam make_box(const std::vector<double>& t, const std::vector<double>& h) {
    if (t.empty() || t.size() != h.size()) throw std::invalid_argument("box: rank mismatch");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(h[k] > 0.0 && h[k] <= 0.5)) throw std::domain_error("box: h outside (0, 1/2]");
        if (!(t[k] >= h[k] && t[k] <= 1.0 - h[k]))
            throw std::domain_error("box: center outside A_h");
    }
    return BoxParam{t, h};
}

double sym_diff_rho(const BoxParam& a, const BoxParam& b) {
    if (a.t.size() != b.t.size()) throw std::invalid_argument("box: rank mismatch");
    double inter = 1.0;
    for (std::size_t k = 0; k < a.t.size(); ++k) {
        const double lo = std::max(a.t[k] - a.h[k], b.t[k] - b.h[k]);
        const double hi = std::min(a.t[k] + a.h[k], b.t[k] + b.h[k]);
        if (hi <= lo) {
            inter = 0.0;
            break;
        }
        inter *= hi - lo;
    }
    const double rho_sq = a.volume() + b.volume() - 2.0 * inter;
    return std::sqrt(std::max(rho_sq, 0.0));
}

// =============================================================================
// Greedy packing on a lattice
// =============================================================================

namespace {

// Flat candidate: center, half-widths, volume.
struct Candidate {
    std::vector<double> t, h;
    double vol;
};

// Candidate enumeration, lexicographic in (h-index vector, t-index vector):
// per axis, h = 2^{-(i+1)} for i = 0..L-1 (coarse to fine), t = j/res for the
// j with t in [h, 1-h]. Only boxes with sigma^2 <= delta survive.
std::vector<Candidate> enumerate_candidates(int d, double delta, int lattice_res) {
    const int levels = static_cast<int>(std::floor(std::log2(static_cast<double>(lattice_res))));
    std::vector<double> hs(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) hs[static_cast<std::size_t>(i)] = std::ldexp(1.0, -(i + 1));

    std::vector<Candidate> out;
    std::vector<int> hidx(static_cast<std::size_t>(d), 1);
    dims_t hlims(static_cast<std::size_t>(d), levels);
    do {
        std::vector<double> h(static_cast<std::size_t>(d));
        double vol = 1.0;
        for (int k = 0; k < d; ++k) {
            h[static_cast<std::size_t>(k)] = hs[static_cast<std::size_t>(hidx[static_cast<std::size_t>(k)] - 1)];
            vol *= 2.0 * h[static_cast<std::size_t>(k)];
        }
        if (vol > delta + 1e-12) continue;

        // per-axis admissible t lattice indices: j/res in [h, 1-h]
        std::vector<std::vector<double>> axis_t(static_cast<std::size_t>(d));
        bool any_empty = false;
        for (int k = 0; k < d; ++k) {
            const double hk = h[static_cast<std::size_t>(k)];
            for (int j = 0; j <= lattice_res; ++j) {
                const double tv = static_cast<double>(j) / static_cast<double>(lattice_res);
                if (tv >= hk - 1e-12 && tv <= 1.0 - hk + 1e-12)
                    axis_t[static_cast<std::size_t>(k)].push_back(tv);
            }
            if (axis_t[static_cast<std::size_t>(k)].empty()) any_empty = true;
        }
        if (any_empty) continue;

        dims_t tlims(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k)
            tlims[static_cast<std::size_t>(k)] =
                static_cast<int>(axis_t[static_cast<std::size_t>(k)].size());
        std::vector<int> tidx(static_cast<std::size_t>(d), 1);
        do {
            Candidate c;
            c.h = h;
            c.vol = vol;
            c.t.resize(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k)
                c.t[static_cast<std::size_t>(k)] =
                    axis_t[static_cast<std::size_t>(k)][static_cast<std::size_t>(tidx[static_cast<std::size_t>(k)] - 1)];
            out.push_back(std::move(c));
        } while (odometer_next(tidx, tlims));
    } while (odometer_next(hidx, hlims));
    return out;
}

// rho^2 between candidates, with cheap volume-difference pruning done by the
// caller.
double rho_sq(const Candidate& a, const Candidate& b) {
    double inter = 1.0;
    for (std::size_t k = 0; k < a.t.size(); ++k) {
        const double lo = std::max(a.t[k] - a.h[k], b.t[k] - b.h[k]);
        const double hi = std::min(a.t[k] + a.h[k], b.t[k] + b.h[k]);
        if (hi <= lo) return a.vol + b.vol;
        inter *= hi - lo;
    }
    return a.vol + b.vol - 2.0 * inter;
}

PackingResult greedy_from_candidates(const std::vector<Candidate>& cands, int d, double delta,
                                     double u) {
    const double thr = u * delta;  // select iff rho^2 > u delta against all kept
    std::vector<const Candidate*> kept;
    for (const Candidate& c : cands) {
        bool ok = true;
        // scan newest-first: nearby boxes were usually selected recently
        for (std::size_t i = kept.size(); i-- > 0;) {
            const Candidate& s = *kept[i];
            // rho^2 >= |vol difference|: if that already clears the bar the
            // pair cannot conflict
            if (std::fabs(c.vol - s.vol) > thr) continue;
            // rho^2 <= vol sum: if even that cannot clear the bar, conflict
            if (c.vol + s.vol <= thr) {
                ok = false;
                break;
            }
            if (rho_sq(c, s) <= thr) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(&c);
    }

    PackingResult res;
    res.delta = delta;
    res.u = u;
    res.count = kept.size();
    const double log_pow = std::pow(std::log(std::exp(1.0) / delta), static_cast<double>(d - 1));
    res.bound_ratio =
        static_cast<double>(res.count) * std::pow(u, 2.0 * d) * delta / log_pow;
    res.selected.reserve(kept.size());
    for (const Candidate* c : kept) res.selected.push_back(BoxParam{c->t, c->h});
    return res;
}

void check_packing_args(int d, double delta, double u, int lattice_res) {
    if (d < 1) throw std::invalid_argument("packing: d must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0) || !(u > 0.0 && u <= 1.0))
        throw std::domain_error("packing: delta and u must lie in (0,1]");
    if (lattice_res < 8) throw std::invalid_argument("packing: lattice_res must be >= 8");
}

}  // namespace

PackingResult greedy_packing(int d, double delta, double u, int lattice_res) {
    check_packing_args(d, delta, u, lattice_res);
    return greedy_from_candidates(enumerate_candidates(d, delta, lattice_res), d, delta, u);
}

PackingResult greedy_packing_reversed(int d, double delta, double u, int lattice_res) {
    check_packing_args(d, delta, u, lattice_res);
    auto cands = enumerate_candidates(d, delta, lattice_res);
    std::reverse(cands.begin(), cands.end());
    return greedy_from_candidates(cands, d, delta, u);
}

std::vector<PackingResult> packing_bound_sweep(int d, const std::vector<double>& deltas,
                                               const std::vector<double>& us, int lattice_res) {
    std::vector<PackingResult> out;
    for (double delta : deltas)
        for (double u : us) out.push_back(greedy_packing(d, delta, u, lattice_res));
    return out;
}

bool packing_pairwise_valid(const PackingResult& r) {
    const double thr = std::sqrt(r.u * r.delta);
    for (std::size_t i = 0; i < r.selected.size(); ++i)
        for (std::size_t j = i + 1; j < r.selected.size(); ++j)
            if (!(sym_diff_rho(r.selected[i], r.selected[j]) > thr)) return false;
    return true;
}

// =============================================================================
// Finest-scale divergence
// =============================================================================

std::vector<DivergenceRow> v_less_one_divergence(int d, double v, const std::vector<int>& m_list,
                                                 int n_seeds, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("divergence: d must be >= 1");
    // v = 1 is allowed as the bounded boundary case for contrast runs.
    if (!(v > 0.0 && v <= 1.0)) throw std::domain_error("not in divergence regime");
    if (m_list.empty()) throw std::invalid_argument("divergence: empty m list");
    for (std::size_t i = 1; i < m_list.size(); ++i)
        if (m_list[i] <= m_list[i - 1])
            throw std::invalid_argument("divergence: m list must be increasing");
    if (n_seeds < 2) throw std::invalid_argument("divergence: need at least 2 seeds");

    std::vector<DivergenceRow> rows;
    for (int m : m_list) {
        if (m < 2) throw std::invalid_argument("divergence: m must be >= 2");
        dims_t dims(static_cast<std::size_t>(d), m);
        const std::size_t cells = total_count(dims);
        const double r_finest = std::pow(static_cast<double>(m), -static_cast<double>(d));
        const double gamma_v = gamma_v_pen(r_finest, v);

        double sum = 0.0, sum_sq = 0.0;
        for (int s = 0; s < n_seeds; ++s) {
            const RngSpec rng{seed, static_cast<std::uint64_t>(s)};
            double mx = 0.0;
            // the m^d finest cells carry exactly iid N(0,1) local averages
            for (std::size_t i = 0; i < cells; ++i)
                mx = std::max(mx, std::fabs(gaussian_at(rng, i)));
            const double stat = mx - gamma_v;
            sum += stat;
            sum_sq += stat * stat;
        }
        const double mean = sum / n_seeds;
        const double var = std::max(0.0, (sum_sq - n_seeds * mean * mean) / (n_seeds - 1));
        DivergenceRow row;
        row.m = m;
        row.mean_stat = mean;
        row.se = std::sqrt(var / n_seeds);
        row.reference = (1.0 - std::sqrt(v)) * std::sqrt(2.0 * d * std::log(static_cast<double>(m)));
        rows.push_back(row);
    }
    return rows;
}

// =============================================================================
// CSV export
// =============================================================================

std::string divergence_rows_csv(const std::vector<DivergenceRow>& rows) {
    std::string out = "m,mean_stat,se,reference\n";
    for (const auto& r : rows) {
        out += std::to_string(r.m);
        out += ',';
        out += dbl_str(r.mean_stat);
        out += ',';
        out += dbl_str(r.se);
        out += ',';
        out += dbl_str(r.reference);
        out += '\n';
    }
    return out;
}

std::string packing_results_csv(const std::vector<PackingResult>& results) {
    std::string out = "delta,u,count,bound_ratio\n";
    for (const auto& r : results) {
        out += dbl_str(r.delta);
        out += ',';
        out += dbl_str(r.u);
        out += ',';
        out += std::to_string(r.count);
        out += ',';
        out += dbl_str(r.bound_ratio);
        out += '\n';
    }
    return out;
}

}  // namespace msgd
