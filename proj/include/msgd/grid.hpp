#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "msgd/nd.hpp"

namespace msgd {

// =============================================================================
// GridField: dense d-dimensional table of observations on the unit lattice
// {(i1/m1, ..., id/md)}. Row-major storage, last axis fastest, 1-based API.
// =============================================================================
struct GridField {
    dims_t dims;
    std::vector<double> values;

    std::size_t count() const { return values.size(); }
    int d() const { return static_cast<int>(dims.size()); }

    double at(const std::vector<int>& idx) const { return values[linear_index(dims, idx)]; }
    double& at(const std::vector<int>& idx) { return values[linear_index(dims, idx)]; }

    // Enforces the type invariants: shape consistency and all-finite values.
    void validate() const;

    static GridField zeros(const dims_t& dims);
    static GridField from_values(const dims_t& dims, std::vector<double> vals);
};

// =============================================================================
// Rect: axis-aligned hyperrectangle as inclusive 1-based index ranges.
// =============================================================================
struct Rect {
    std::vector<int> lo;
    std::vector<int> hi;

    Rect() = default;
    Rect(std::vector<int> l, std::vector<int> h) : lo(std::move(l)), hi(std::move(h)) {}

    std::uint64_t point_count() const {
        std::uint64_t n = 1;
        for (std::size_t k = 0; k < lo.size(); ++k) n *= static_cast<std::uint64_t>(hi[k] - lo[k] + 1);
        return n;
    }
    std::vector<int> lengths() const {
        std::vector<int> L(lo.size());
        for (std::size_t k = 0; k < lo.size(); ++k) L[k] = hi[k] - lo[k] + 1;
        return L;
    }
    bool operator==(const Rect& o) const { return lo == o.lo && hi == o.hi; }
};

// Throws std::out_of_range("invalid rectangle") unless 1 <= lo_k <= hi_k <= m_k.
void check_rect(const dims_t& dims, const Rect& r);

// Point fraction r(B) = point_count / prod m_k, the discrete scale measure
// fed to the penalty functions.
double point_fraction(const dims_t& dims, const Rect& r);
double point_fraction(const dims_t& dims, const std::vector<int>& lengths);

// =============================================================================
// PrefixTable: d-dimensional cumulative sums with a zero-padded face, giving
// O(2^d) rectangle sums by inclusion-exclusion.
// =============================================================================
struct PrefixTable {
    dims_t dims;           // original grid dims
    dims_t padded;         // dims + 1 per axis
    std::vector<double> cum;  // padded table; index 0 on any axis is the zero face

    // Cumulative value at 1-based index (i1..id); any i_k = 0 hits the zero face.
    double cum_at(const std::vector<int>& idx) const;
};

// Builds the cumulative table. Accumulation runs in extended precision; axes
// of length >= 512 switch to compensated (Neumaier) running sums. Rejects
// grids whose total absolute sum is not representable ("overflow").
PrefixTable build_prefix(const GridField& grid);

// Sum of grid values over rect via the canonical inclusion-exclusion
// expression (see statistics engine: both evaluate the identical float
// expression, so results are bit-equal).
double rect_sum(const PrefixTable& table, const Rect& rect);

// =============================================================================
// Rectangle family enumeration
// =============================================================================
// The family is every nonempty per-axis index range, singletons included.
// Canonical order: sorted by the per-axis length vector (lexicographic),
// then by lo (lexicographic). Argmax tie-breaking downstream relies on it.

using ScaleFilter = std::function<bool(const std::vector<int>& lengths)>;

// Closed-form family size without a filter: prod m_k (m_k + 1) / 2.
std::uint64_t rect_family_size(const dims_t& dims);
// Family size honoring a filter (sums prod (m_k - l_k + 1) over passing scales).
std::uint64_t rect_family_size(const dims_t& dims, const ScaleFilter& filter);

// Visit every rect in canonical order. Returns the number visited.
std::uint64_t enumerate_rects(const dims_t& dims, const ScaleFilter& filter,
                              const std::function<void(const Rect&)>& fn);

// Materialized variant for tests / small dims.
std::vector<Rect> all_rects(const dims_t& dims, const ScaleFilter& filter = nullptr);

// Visit every passing length vector in canonical (lexicographic) order.
void for_each_scale(const dims_t& dims, const ScaleFilter& filter,
                    const std::function<void(const std::vector<int>&)>& fn);

// Convenience: filter from uniform per-axis side bounds (0 = unbounded).
ScaleFilter side_bounds_filter(int min_side, int max_side);

}  // namespace msgd
