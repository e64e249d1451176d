#include "msgd/grid.hpp"

#include <cfloat>
#include <cmath>

namespace msgd {

// =============================================================================
// GridField
// =============================================================================

void GridField::validate() const {
    const std::size_t n = total_count(dims);
    if (values.size() != n) throw std::invalid_argument("grid: value count does not match dims");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("grid: non-finite value");
}

GridField GridField::zeros(const dims_t& dims) {
    GridField g;
    g.dims = dims;
    g.values.assign(total_count(dims), 0.0);
    return g;
}

GridField GridField::from_values(const dims_t& dims, std::vector<double> vals) {
    GridField g;
    g.dims = dims;
    g.values = std::move(vals);
    g.validate();
    return g;
}

// =============================================================================
// Rect helpers
// =============================================================================

void check_rect(const dims_t& dims, const Rect& r) {
    if (r.lo.size() != dims.size() || r.hi.size() != dims.size())
        throw std::out_of_range("invalid rectangle");
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (r.lo[k] < 1 || r.lo[k] > r.hi[k] || r.hi[k] > dims[k])
            throw std::out_of_range("invalid rectangle");
}

double point_fraction(const dims_t& dims, const Rect& r) {
    return point_fraction(dims, r.lengths());
}

double point_fraction(const dims_t& dims, const std::vector<int>& lengths) {
    double frac = 1.0;
    for (std::size_t k = 0; k < dims.size(); ++k)
        frac *= static_cast<double>(lengths[k]) / static_cast<double>(dims[k]);
    return frac;
}

// =============================================================================
// PrefixTable
// =============================================================================

double PrefixTable::cum_at(const std::vector<int>& idx) const {
    if (idx.size() != padded.size()) throw std::invalid_argument("index rank mismatch");
    std::size_t off = 0, stride = 1;
    for (std::size_t k = padded.size(); k-- > 0;) {
        const int i = idx[k];
        if (i < 0 || i >= padded[k]) throw std::out_of_range("index out of range");
        off += static_cast<std::size_t>(i) * stride;
        stride *= static_cast<std::size_t>(padded[k]);
    }
    return cum[off];
}

PrefixTable build_prefix(const GridField& grid) {
    grid.validate();
    const int d = grid.d();

    // Reject grids whose running sums cannot be represented in a double.
    long double abs_total = 0.0L;
    for (double v : grid.values) abs_total += std::fabs(static_cast<long double>(v));
    if (abs_total > static_cast<long double>(DBL_MAX)) throw std::overflow_error("overflow");

    PrefixTable t;
    t.dims = grid.dims;
    t.padded.resize(d);
    for (int k = 0; k < d; ++k) t.padded[k] = grid.dims[k] + 1;

    const std::size_t padded_n = total_count(t.padded);
    t.cum.assign(padded_n, 0.0);

    // Scatter the raw values into the padded table (offset +1 on every axis).
    const auto src_strides = make_strides(grid.dims);
    const auto dst_strides = make_strides(t.padded);
    {
        std::vector<int> idx(d, 1);
        std::size_t src = 0;
        do {
            std::size_t dst = 0;
            for (int k = 0; k < d; ++k) dst += static_cast<std::size_t>(idx[k]) * dst_strides[k];
            t.cum[dst] = grid.values[src++];
        } while (odometer_next(idx, grid.dims));
    }

    // One accumulation pass per axis, in fixed axis order. Axes of length
    // >= 512 use Neumaier compensation; shorter axes run in long double.
    for (int axis = 0; axis < d; ++axis) {
        const bool compensated = grid.dims[axis] >= 512;
        const std::size_t axis_stride = dst_strides[axis];
        const int axis_len = t.padded[axis];

        // Iterate over all lines along `axis`: every padded index with the
        // axis coordinate fixed to 0 is a line start.
        dims_t line_lims = t.padded;
        line_lims[axis] = 1;
        std::vector<int> pos(d, 1);  // odometer over 1..line_lims (padded coords shifted by 1)
        do {
            std::size_t base = 0;
            for (int k = 0; k < d; ++k)
                base += static_cast<std::size_t>(k == axis ? 0 : pos[k] - 1) * dst_strides[k];
            if (compensated) {
                double sum = 0.0, comp = 0.0;
                for (int i = 0; i < axis_len; ++i) {
                    const double v = t.cum[base + static_cast<std::size_t>(i) * axis_stride];
                    const double s = sum + v;
                    if (std::fabs(sum) >= std::fabs(v))
                        comp += (sum - s) + v;
                    else
                        comp += (v - s) + sum;
                    sum = s;
                    t.cum[base + static_cast<std::size_t>(i) * axis_stride] = sum + comp;
                }
            } else {
                long double acc = 0.0L;
                for (int i = 0; i < axis_len; ++i) {
                    acc += static_cast<long double>(t.cum[base + static_cast<std::size_t>(i) * axis_stride]);
                    t.cum[base + static_cast<std::size_t>(i) * axis_stride] = static_cast<double>(acc);
                }
            }
        } while (odometer_next(pos, line_lims));
    }
    return t;
}

// -----------------------------------------------------------------------------
// Canonical inclusion-exclusion.
//
// rect_sum = A(hi_d) - A(lo_d - 1), where for a fixed last-axis coordinate c,
//   A(c) = sum over corner masks (bits of the first d-1 axes, mask order
//          0 .. 2^(d-1)-1) of sign * P[corner(mask), c],
//   bit k set -> use hi_k, clear -> use lo_k - 1; sign = (-1)^(d-1-popcount).
// The statistics engine evaluates the same expression term by term, which is
// what makes the fast path bit-identical to this function.
// -----------------------------------------------------------------------------
namespace {

double corner_profile(const PrefixTable& t, const Rect& r, int c_last) {
    const int d = static_cast<int>(t.dims.size());
    const auto strides = make_strides(t.padded);
    const int nmask = 1 << (d - 1);
    double acc = 0.0;
    for (int mask = 0; mask < nmask; ++mask) {
        std::size_t off = static_cast<std::size_t>(c_last) * strides[d - 1];
        int popcount = 0;
        for (int k = 0; k < d - 1; ++k) {
            const bool use_hi = (mask >> k) & 1;
            popcount += use_hi ? 1 : 0;
            const int coord = use_hi ? r.hi[k] : r.lo[k] - 1;
            off += static_cast<std::size_t>(coord) * strides[k];
        }
        const double term = t.cum[off];
        if (((d - 1 - popcount) & 1) == 0)
            acc += term;
        else
            acc -= term;
    }
    return acc;
}

}  // namespace

double rect_sum(const PrefixTable& table, const Rect& rect) {
    check_rect(table.dims, rect);
    const int d = static_cast<int>(table.dims.size());
    const double a_hi = corner_profile(table, rect, rect.hi[d - 1]);
    const double a_lo = corner_profile(table, rect, rect.lo[d - 1] - 1);
    return a_hi - a_lo;
}

// =============================================================================
// Enumeration
// =============================================================================

std::uint64_t rect_family_size(const dims_t& dims) {
    check_dims(dims);
    std::uint64_t n = 1;
    for (int m : dims) n *= static_cast<std::uint64_t>(m) * (static_cast<std::uint64_t>(m) + 1) / 2;
    return n;
}

std::uint64_t rect_family_size(const dims_t& dims, const ScaleFilter& filter) {
    if (!filter) return rect_family_size(dims);
    std::uint64_t n = 0;
    for_each_scale(dims, filter, [&](const std::vector<int>& L) {
        std::uint64_t s = 1;
        for (std::size_t k = 0; k < dims.size(); ++k)
            s *= static_cast<std::uint64_t>(dims[k] - L[k] + 1);
        n += s;
    });
    return n;
}

void for_each_scale(const dims_t& dims, const ScaleFilter& filter,
                    const std::function<void(const std::vector<int>&)>& fn) {
    check_dims(dims);
    std::vector<int> L(dims.size(), 1);
    do {
        if (!filter || filter(L)) fn(L);
    } while (odometer_next(L, dims));
}

std::uint64_t enumerate_rects(const dims_t& dims, const ScaleFilter& filter,
                              const std::function<void(const Rect&)>& fn) {
    std::uint64_t count = 0;
    for_each_scale(dims, filter, [&](const std::vector<int>& L) {
        const int d = static_cast<int>(dims.size());
        dims_t lo_lims(d);
        for (int k = 0; k < d; ++k) lo_lims[k] = dims[k] - L[k] + 1;
        Rect r;
        r.lo.assign(d, 1);
        r.hi.resize(d);
        do {
            for (int k = 0; k < d; ++k) r.hi[k] = r.lo[k] + L[k] - 1;
            fn(r);
            ++count;
        } while (odometer_next(r.lo, lo_lims));
    });
    return count;
}

std::vector<Rect> all_rects(const dims_t& dims, const ScaleFilter& filter) {
    std::vector<Rect> out;
    enumerate_rects(dims, filter, [&](const Rect& r) { out.push_back(r); });
    return out;
}

ScaleFilter side_bounds_filter(int min_side, int max_side) {
    if (min_side <= 0 && max_side <= 0) return nullptr;
    return [min_side, max_side](const std::vector<int>& L) {
        for (int l : L) {
            if (min_side > 0 && l < min_side) return false;
            if (max_side > 0 && l > max_side) return false;
        }
        return true;
    };
}

}  // namespace msgd
