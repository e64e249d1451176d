#include "msgd/statistics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "msgd/parallel.hpp"

namespace msgd {

// =============================================================================
// Spec plumbing
// =============================================================================

std::string StatisticSpec::kind_string() const {
    switch (kind) {
        case StatKind::Multiscale: return "multiscale";
        case StatKind::MultiscaleStar: return "multiscale-star";
        case StatKind::Scan: return "scan";
        case StatKind::ALR: return "alr";
    }
    return "multiscale";
}

StatKind parse_stat_kind(const std::string& s) {
    if (s == "multiscale") return StatKind::Multiscale;
    if (s == "multiscale-star") return StatKind::MultiscaleStar;
    if (s == "scan") return StatKind::Scan;
    if (s == "alr") return StatKind::ALR;
    throw std::invalid_argument("statistic spec: unknown kind '" + s + "'");
}

std::string StatisticSpec::fingerprint_fields() const {
    std::string out = "stat=" + kind_string();
    out += ";kernel=" + kernel.spec_string();
    if (!penalized()) {
        out += ";V=na";
    } else if (kind == StatKind::Multiscale && penalty.variant == PenaltyVariant::Standard) {
        out += ";V=std";  // standard Gamma + D normalizer, not a Gamma_V member
    } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, ";V=%.17g", penalty.effective_v());
        out += buf;
    }
    if (min_side > 0 || max_side > 0) {
        out += ";minside=" + std::to_string(min_side) + ";maxside=" + std::to_string(max_side);
    }
    return out;
}

// =============================================================================
// Elementary statistics
// =============================================================================

double psi_hat_rect(const PrefixTable& table, const Rect& rect) {
    const double s = rect_sum(table, rect);
    return s / std::sqrt(static_cast<double>(rect.point_count()));
}

double psi_hat_kernel(const GridField& grid, const ScaledKernel& sk) {
    const SampledWeights w = sampled_weights(sk, grid.dims);
    long double acc = 0.0L;
    for (const auto& [idx, wv] : w.weights)
        acc += static_cast<long double>(wv) * grid.at(idx);
    return static_cast<double>(acc) / w.empirical_norm;
}

// =============================================================================
// Indicator-kernel engine
//
// Work is chunked by the first-axis length l1; each chunk owns the scales
// with that l1 and visits its rectangles in the fixed order
// (lo1, l2, lo2, ..., l_{d-1}, lo_{d-1}, l_d, lo_d). Per-scale maxima are
// merged by concatenation (scales are disjoint across chunks) and the ALR
// log-sum-exp partials are merged in chunk order, so every reduction is
// independent of the thread schedule.
// =============================================================================

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ScaleState {
    double max_abs = -1.0;        // max |raw rect sum| at this scale
    std::vector<int> argmax_lo;   // first lo (lex) attaining it
};

struct LsePartial {
    double m = kNegInf;  // running max of x = psi_hat^2 / 2
    double s = 0.0;      // sum of exp(x - m)
};

struct EngineResult {
    std::vector<std::vector<int>> scale_lengths;  // canonical lex order
    std::vector<ScaleState> scales;
    LsePartial lse;
    std::uint64_t rect_count = 0;
};

inline void lse_add(LsePartial& p, double x) {
    if (x > p.m) {
        p.s = p.s * std::exp(p.m - x) + 1.0;
        p.m = x;
    } else {
        p.s += std::exp(x - p.m);
    }
}

inline void lse_merge(LsePartial& a, const LsePartial& b) {
    if (b.s == 0.0) return;
    if (a.s == 0.0) {
        a = b;
        return;
    }
    if (b.m > a.m) {
        a.s = a.s * std::exp(a.m - b.m) + b.s;
        a.m = b.m;
    } else {
        a.s += b.s * std::exp(b.m - a.m);
    }
}

// Profile along the last axis for fixed bounds on axes 1..d-1:
// g[c] = A(c) accumulated corner-mask by corner-mask in canonical order.
// Element-for-element this is the same float expression rect_sum evaluates,
// which keeps engine sums bit-identical to rect_sum.
void build_profile(const PrefixTable& t, const std::vector<std::size_t>& strides,
                   const std::vector<int>& lo, const std::vector<int>& hi, std::vector<double>& g) {
    const int d = static_cast<int>(t.dims.size());
    const int last = t.padded[d - 1];
    const int nmask = 1 << (d - 1);
    for (int mask = 0; mask < nmask; ++mask) {
        std::size_t base = 0;
        int popcount = 0;
        for (int k = 0; k < d - 1; ++k) {
            const bool use_hi = (mask >> k) & 1;
            popcount += use_hi ? 1 : 0;
            base += static_cast<std::size_t>(use_hi ? hi[k] : lo[k] - 1) * strides[k];
        }
        const double* row = t.cum.data() + base;
        const bool positive = ((d - 1 - popcount) & 1) == 0;
        if (mask == 0) {
            if (positive)
                for (int c = 0; c < last; ++c) g[c] = row[c];
            else
                for (int c = 0; c < last; ++c) g[c] = -row[c];
        } else {
            if (positive)
                for (int c = 0; c < last; ++c) g[c] += row[c];
            else
                for (int c = 0; c < last; ++c) g[c] -= row[c];
        }
    }
}

// Scales grouped by first-axis length; the canonical lex scale order keeps
// each group contiguous.
struct ScalePlan {
    std::vector<std::vector<int>> lengths;       // canonical order
    std::vector<std::size_t> group_begin;        // per l1 value (index l1-1), begin..end in `lengths`
    std::vector<std::size_t> group_end;
};

ScalePlan plan_scales(const dims_t& dims, const ScaleFilter& filter) {
    ScalePlan plan;
    plan.group_begin.assign(static_cast<std::size_t>(dims[0]), 0);
    plan.group_end.assign(static_cast<std::size_t>(dims[0]), 0);
    int prev_l1 = 0;
    for_each_scale(dims, filter, [&](const std::vector<int>& L) {
        const int l1 = L[0];
        if (l1 != prev_l1) {
            for (int f = prev_l1; f < l1; ++f) {
                // close previous group, open empty ones in between
                if (f >= 1) plan.group_end[f - 1] = plan.lengths.size();
                if (f >= 1 && f < l1) plan.group_begin[f] = plan.lengths.size();
            }
            plan.group_begin[l1 - 1] = plan.lengths.size();
            prev_l1 = l1;
        }
        plan.lengths.push_back(L);
    });
    if (prev_l1 >= 1) plan.group_end[prev_l1 - 1] = plan.lengths.size();
    for (int l1 = prev_l1; l1 < dims[0]; ++l1) {
        plan.group_begin[l1] = plan.lengths.size();
        plan.group_end[l1] = plan.lengths.size();
    }
    if (plan.lengths.empty()) throw std::domain_error("empty enumeration");
    return plan;
}

// One chunk: all scales whose first-axis length is l1 = chunk + 1.
void run_chunk_d1(const PrefixTable& t, int l1, ScaleState& state, LsePartial& lse, bool need_alr,
                  std::uint64_t& rect_count) {
    const int m = t.dims[0];
    const double* cum = t.cum.data();
    const double sqrt_c = std::sqrt(static_cast<double>(l1));
    double best = -1.0;
    int best_lo = 0;
    for (int lo = 1; lo + l1 - 1 <= m; ++lo) {
        const double s = cum[lo + l1 - 1] - cum[lo - 1];
        const double a = std::fabs(s);
        if (a > best) {
            best = a;
            best_lo = lo;
        }
        if (need_alr) {
            const double psi = s / sqrt_c;
            lse_add(lse, 0.5 * psi * psi);
        }
        ++rect_count;
    }
    state.max_abs = best;
    state.argmax_lo = {best_lo};
}

void run_chunk_nd(const PrefixTable& t, int l1, const ScalePlan& plan,
                  std::vector<ScaleState>& states, LsePartial& lse, bool need_alr,
                  std::uint64_t& rect_count) {
    const int d = static_cast<int>(t.dims.size());
    const int m1 = t.dims[0];
    const int md = t.dims[d - 1];
    const auto strides = make_strides(t.padded);

    const std::size_t g_begin = plan.group_begin[l1 - 1];
    const std::size_t g_end = plan.group_end[l1 - 1];
    if (g_begin == g_end) return;

    // Scale index lookup within this chunk: scales are (l1, l2..ld) in lex
    // order of the tail (l2..ld); precompute sqrt(point count) per scale.
    std::vector<double> sqrt_c(g_end - g_begin);
    for (std::size_t si = g_begin; si < g_end; ++si) {
        double c = 1.0;
        for (int k = 0; k < d; ++k) c *= static_cast<double>(plan.lengths[si][k]);
        sqrt_c[si - g_begin] = std::sqrt(c);
    }

    std::vector<double> g(static_cast<std::size_t>(t.padded[d - 1]));
    std::vector<int> lo(d), hi(d), mid_len(d);

    // Middle axes 2..d-1 iterate (length, position) pairs via a manual
    // odometer over pairs; axis 1 position iterates outermost.
    for (int lo1 = 1; lo1 + l1 - 1 <= m1; ++lo1) {
        lo[0] = lo1;
        hi[0] = lo1 + l1 - 1;
        mid_len[0] = l1;

        // odometer over axes 1..d-2 (0-based axes 1..d-2 are "middle")
        const int n_mid = d - 2;
        std::vector<int> mlen(n_mid, 1), mlo(n_mid, 1);
        bool mid_done = false;
        while (!mid_done) {
            for (int k = 0; k < n_mid; ++k) {
                mid_len[k + 1] = mlen[k];
                lo[k + 1] = mlo[k];
                hi[k + 1] = mlo[k] + mlen[k] - 1;
            }
            build_profile(t, strides, lo, hi, g);

            // Inner sweep over last-axis (length, position).
            for (std::size_t si = g_begin; si < g_end; ++si) {
                const std::vector<int>& L = plan.lengths[si];
                bool mid_match = true;
                for (int k = 1; k < d - 1; ++k)
                    if (L[k] != mid_len[k]) {
                        mid_match = false;
                        break;
                    }
                if (!mid_match) continue;
                const int ld = L[d - 1];
                const double sc = sqrt_c[si - g_begin];
                ScaleState& st = states[si];
                double best = -1.0;
                for (int lod = 1; lod + ld - 1 <= md; ++lod) {
                    const double s = g[lod + ld - 1] - g[lod - 1];
                    const double a = std::fabs(s);
                    if (a > best) best = a;
                    if (need_alr) {
                        const double psi = s / sc;
                        lse_add(lse, 0.5 * psi * psi);
                    }
                }
                rect_count += static_cast<std::uint64_t>(md - ld + 1);
                if (best > st.max_abs) {
                    // rescan for the first last-axis position attaining it
                    for (int lod = 1; lod + ld - 1 <= md; ++lod) {
                        const double s = g[lod + ld - 1] - g[lod - 1];
                        if (std::fabs(s) == best) {
                            st.max_abs = best;
                            st.argmax_lo = lo;
                            st.argmax_lo[d - 1] = lod;
                            break;
                        }
                    }
                }
            }

            // advance middle odometer: innermost = (len, lo) of axis d-2,
            // positions fastest within each length
            mid_done = true;
            for (int k = n_mid; k-- > 0;) {
                const int axis_m = t.dims[k + 1];
                if (mlo[k] + mlen[k] - 1 < axis_m) {
                    ++mlo[k];
                    mid_done = false;
                    break;
                }
                if (mlen[k] < axis_m) {
                    ++mlen[k];
                    mlo[k] = 1;
                    mid_done = false;
                    break;
                }
                mlen[k] = 1;
                mlo[k] = 1;
            }
            if (n_mid == 0) mid_done = true;
        }
    }
}

EngineResult run_indicator_engine(const GridField& grid, const ScaleFilter& filter, bool need_alr,
                                  int threads) {
    const PrefixTable t = build_prefix(grid);
    const int d = grid.d();
    ScalePlan plan = plan_scales(grid.dims, filter);

    EngineResult out;
    out.scales.assign(plan.lengths.size(), ScaleState{});

    const std::size_t n_chunks = static_cast<std::size_t>(grid.dims[0]);
    std::vector<LsePartial> lse(n_chunks);
    std::vector<std::uint64_t> counts(n_chunks, 0);

    run_chunks(n_chunks, threads, [&](std::size_t chunk) {
        const int l1 = static_cast<int>(chunk) + 1;
        if (d == 1) {
            const std::size_t b = plan.group_begin[chunk];
            if (b == plan.group_end[chunk]) return;
            run_chunk_d1(t, l1, out.scales[b], lse[chunk], need_alr, counts[chunk]);
        } else {
            run_chunk_nd(t, l1, plan, out.scales, lse[chunk], need_alr, counts[chunk]);
        }
    });

    // Order-fixed merges.
    for (std::size_t c = 0; c < n_chunks; ++c) {
        lse_merge(out.lse, lse[c]);
        out.rect_count += counts[c];
    }
    out.scale_lengths = std::move(plan.lengths);
    return out;
}

// Derives one statistic from the shared engine output.
DetectionResult derive_stat(const EngineResult& eng, const dims_t& dims, const StatisticSpec& spec,
                            bool want_per_scale) {
    DetectionResult res;
    res.rect_count = eng.rect_count;

    const bool is_alr = spec.kind == StatKind::ALR;
    // Per-scale statistic value; ALR and Scan both locate the rect with the
    // largest |psi_hat|.
    double best = kNegInf;
    std::size_t best_scale = SIZE_MAX;
    std::map<std::vector<int>, double> per_scale;

    for (std::size_t si = 0; si < eng.scale_lengths.size(); ++si) {
        const std::vector<int>& L = eng.scale_lengths[si];
        double c = 1.0;
        for (std::size_t k = 0; k < L.size(); ++k) c *= static_cast<double>(L[k]);
        const double sqrt_c = std::sqrt(c);
        const double max_psi = eng.scales[si].max_abs / sqrt_c;
        if (want_per_scale) per_scale[L] = max_psi;

        double v;
        switch (spec.kind) {
            case StatKind::Multiscale: {
                const double r = point_fraction(dims, L);
                if (spec.penalty.variant == PenaltyVariant::GammaV)
                    v = max_psi - gamma_v_pen(r, spec.penalty.effective_v());  // D only under Standard
                else
                    v = (max_psi - gamma_pen(r)) / d_norm(r);
                break;
            }
            case StatKind::MultiscaleStar: {
                const double r = point_fraction(dims, L);
                v = max_psi - gamma_v_pen(r, spec.penalty.effective_v());
                break;
            }
            case StatKind::Scan:
            case StatKind::ALR:
                v = max_psi;
                break;
            default:
                v = max_psi;
        }
        if (v > best) {
            best = v;
            best_scale = si;
        }
    }

    const std::vector<int>& L = eng.scale_lengths[best_scale];
    res.argmax_rect.lo = eng.scales[best_scale].argmax_lo;
    res.argmax_rect.hi.resize(L.size());
    for (std::size_t k = 0; k < L.size(); ++k)
        res.argmax_rect.hi[k] = res.argmax_rect.lo[k] + L[k] - 1;

    if (is_alr) {
        res.value = eng.lse.m + std::log(eng.lse.s) - std::log(static_cast<double>(eng.rect_count));
    } else {
        res.value = best;
    }
    if (want_per_scale) res.per_scale_max = std::move(per_scale);
    return res;
}

// Slow path: Hoelder-bump multiscale statistics. Centers/bandwidths are the
// ones induced by the integer index ranges, t = (lo+hi)/(2m) and
// h = (hi-lo+1)/(2m), so the weight pattern depends on the scale only.
DetectionResult run_bump_multiscale(const GridField& grid, const StatisticSpec& spec,
                                    bool want_per_scale) {
    const int d = grid.d();
    const dims_t& dims = grid.dims;
    const ScaleFilter filter = spec.filter();
    const Kernel psi = spec.kernel;

    DetectionResult res;
    double best = kNegInf;
    bool any = false;
    std::map<std::vector<int>, double> per_scale;

    for_each_scale(dims, filter, [&](const std::vector<int>& L) {
        // weight pattern w[j] = psi((2 j - (l - 1)) / l) per axis offset j
        std::vector<std::vector<double>> axis_z(d);
        for (int k = 0; k < d; ++k) {
            axis_z[k].resize(L[k]);
            for (int j = 0; j < L[k]; ++j)
                axis_z[k][j] = (2.0 * j - (L[k] - 1.0)) / static_cast<double>(L[k]);
        }
        std::vector<int> rel(d, 1);
        dims_t rel_lims(d);
        for (int k = 0; k < d; ++k) rel_lims[k] = L[k];
        std::vector<double> z(d);
        std::vector<double> w;
        std::vector<std::vector<int>> offs;
        long double norm_sq = 0.0L;
        do {
            for (int k = 0; k < d; ++k) z[k] = axis_z[k][rel[k] - 1];
            const double wv = kernel_eval(psi, z);
            if (wv != 0.0) {
                std::vector<int> o(d);
                for (int k = 0; k < d; ++k) o[k] = rel[k] - 1;
                offs.push_back(std::move(o));
                w.push_back(wv);
                norm_sq += static_cast<long double>(wv) * wv;
            }
        } while (odometer_next(rel, rel_lims));
        if (w.empty()) return;  // cannot happen: the center offset is always 0
        const double norm = std::sqrt(static_cast<double>(norm_sq));

        const double r = point_fraction(dims, L);
        const double gam = spec.kind == StatKind::Multiscale && spec.penalty.variant == PenaltyVariant::Standard
                               ? gamma_pen(r)
                               : gamma_v_pen(r, spec.penalty.effective_v());
        const bool use_d = spec.kind == StatKind::Multiscale && spec.penalty.variant == PenaltyVariant::Standard;
        const double dn = use_d ? d_norm(r) : 1.0;

        double scale_best_psi = -1.0;
        std::vector<int> scale_arg;
        dims_t lo_lims(d);
        for (int k = 0; k < d; ++k) lo_lims[k] = dims[k] - L[k] + 1;
        std::vector<int> lo(d, 1), idx(d);
        do {
            long double acc = 0.0L;
            for (std::size_t j = 0; j < w.size(); ++j) {
                for (int k = 0; k < d; ++k) idx[k] = lo[k] + offs[j][k];
                acc += static_cast<long double>(w[j]) * grid.at(idx);
            }
            const double psi_hat = std::fabs(static_cast<double>(acc) / norm);
            if (psi_hat > scale_best_psi) {
                scale_best_psi = psi_hat;
                scale_arg = lo;
            }
            ++res.rect_count;
        } while (odometer_next(lo, lo_lims));

        if (want_per_scale) per_scale[L] = scale_best_psi;
        const double v = (scale_best_psi - gam) / dn;
        if (v > best) {
            best = v;
            res.argmax_rect.lo = scale_arg;
            res.argmax_rect.hi.resize(d);
            for (int k = 0; k < d; ++k) res.argmax_rect.hi[k] = scale_arg[k] + L[k] - 1;
        }
        any = true;
    });

    if (!any) throw std::domain_error("empty enumeration");
    res.value = best;
    if (want_per_scale) res.per_scale_max = std::move(per_scale);
    return res;
}

}  // namespace

// =============================================================================
// Public statistics
// =============================================================================

std::vector<DetectionResult> evaluate_bundle(const GridField& grid,
                                             const std::vector<StatisticSpec>& specs, int threads,
                                             bool want_per_scale) {
    if (specs.empty()) throw std::invalid_argument("evaluate_bundle: no specs");
    bool need_alr = false;
    for (const auto& s : specs) {
        if (s.kernel.kind != KernelKind::Indicator)
            throw std::invalid_argument("evaluate_bundle: indicator kernel required");
        if (s.min_side != specs[0].min_side || s.max_side != specs[0].max_side)
            throw std::invalid_argument("evaluate_bundle: specs must share scale bounds");
        if (s.kind == StatKind::ALR) need_alr = true;
    }
    const EngineResult eng = run_indicator_engine(grid, specs[0].filter(), need_alr, threads);
    std::vector<DetectionResult> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(derive_stat(eng, grid.dims, s, want_per_scale));
    return out;
}

DetectionResult evaluate(const GridField& grid, const StatisticSpec& spec, int threads,
                         bool want_per_scale) {
    if (spec.kernel.kind == KernelKind::HolderBump) {
        if (spec.kind == StatKind::Scan || spec.kind == StatKind::ALR)
            throw std::invalid_argument("indicator kernel required for scan/alr");
        if (spec.kernel.d != grid.d()) throw std::invalid_argument("kernel dimension mismatch");
        return run_bump_multiscale(grid, spec, want_per_scale);
    }
    return evaluate_bundle(grid, {spec}, threads, want_per_scale)[0];
}

DetectionResult multiscale_T(const GridField& grid, const StatisticSpec& spec, int threads,
                             bool want_per_scale) {
    StatisticSpec s = spec;
    s.kind = StatKind::Multiscale;
    return evaluate(grid, s, threads, want_per_scale);
}

DetectionResult multiscale_T_star(const GridField& grid, const StatisticSpec& spec, int threads,
                                  bool want_per_scale) {
    StatisticSpec s = spec;
    s.kind = StatKind::MultiscaleStar;
    return evaluate(grid, s, threads, want_per_scale);
}

DetectionResult scan_Mn(const GridField& grid, const StatisticSpec& spec, int threads,
                        bool want_per_scale) {
    StatisticSpec s = spec;
    s.kind = StatKind::Scan;
    return evaluate(grid, s, threads, want_per_scale);
}

DetectionResult alr_An(const GridField& grid, const StatisticSpec& spec, int threads,
                       bool want_per_scale) {
    StatisticSpec s = spec;
    s.kind = StatKind::ALR;
    return evaluate(grid, s, threads, want_per_scale);
}

}  // namespace msgd
