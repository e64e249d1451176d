#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

// Shared n-dimensional index helpers. Grids are stored row-major with the
// LAST axis fastest; all public indices are 1-based per axis.

namespace msgd {

using dims_t = std::vector<int>;

inline void check_dims(const dims_t& dims) {
    if (dims.empty()) throw std::invalid_argument("dims: need d >= 1");
    for (int m : dims)
        if (m < 1) throw std::invalid_argument("dims: each axis size must be >= 1");
}

// Total lattice point count, with overflow detection.
inline std::size_t total_count(const dims_t& dims) {
    check_dims(dims);
    std::size_t n = 1;
    for (int m : dims) {
        const std::size_t mm = static_cast<std::size_t>(m);
        if (n > SIZE_MAX / mm) throw std::overflow_error("dimension overflow");
        n *= mm;
    }
    return n;
}

// Strides for row-major layout (last axis stride 1), in units of elements.
inline std::vector<std::size_t> make_strides(const dims_t& dims) {
    std::vector<std::size_t> s(dims.size());
    std::size_t acc = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
        s[k] = acc;
        acc *= static_cast<std::size_t>(dims[k]);
    }
    return s;
}

// Linear offset of a 1-based multi-index.
inline std::size_t linear_index(const dims_t& dims, const std::vector<int>& idx) {
    if (idx.size() != dims.size()) throw std::invalid_argument("index rank mismatch");
    std::size_t off = 0, stride = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
        const int i = idx[k];
        if (i < 1 || i > dims[k]) throw std::out_of_range("index out of range");
        off += static_cast<std::size_t>(i - 1) * stride;
        stride *= static_cast<std::size_t>(dims[k]);
    }
    return off;
}

// Odometer increment over a 1-based multi-index box [1..lim_k]; returns false
// after the last combination. Last axis spins fastest, matching memory order.
inline bool odometer_next(std::vector<int>& idx, const dims_t& lims) {
    for (std::size_t k = idx.size(); k-- > 0;) {
        if (idx[k] < lims[k]) {
            ++idx[k];
            return true;
        }
        idx[k] = 1;
    }
    return false;
}

// Shortest decimal string that parses back to exactly the same double.
inline std::string dbl_str(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string join_ints(const std::vector<int>& v, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(sep);
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace msgd
