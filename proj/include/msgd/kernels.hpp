#pragma once

#include <string>
#include <utility>
#include <vector>

#include "msgd/nd.hpp"

namespace msgd {

// =============================================================================
// Kernels: indicator psi_0 = 1 on [-1,1]^d, and the Hoelder bump
// psi_beta(x) = (1 - ||x||^beta)_+ for beta in (0,1]. Both vanish outside
// [-1,1]^d and satisfy psi(0) = 1.
// =============================================================================

enum class KernelKind { Indicator, HolderBump };

struct Kernel {
    KernelKind kind = KernelKind::Indicator;
    double beta = 1.0;  // HolderBump only
    int d = 1;

    static Kernel indicator(int d);
    static Kernel holder(double beta, int d);

    bool operator==(const Kernel& o) const { return kind == o.kind && beta == o.beta && d == o.d; }

    // Canonical CLI form: "indicator" | "holder:<beta>".
    std::string spec_string() const;
};

Kernel parse_kernel_spec(const std::string& s, int d);

// Centered/scaled form psi_{t,h}(x) = psi((x - t)/h). The box
// prod [t_k - h_k, t_k + h_k] holds the support; it lies inside [0,1]^d
// whenever t is in A_h (h_k <= t_k <= 1 - h_k), which is not required here
// because ranges touching the grid boundary induce boxes that overhang by
// half a lattice step.
struct ScaledKernel {
    Kernel base;
    std::vector<double> t;
    std::vector<double> h;

    ScaledKernel(Kernel k, std::vector<double> center, std::vector<double> bandwidth);
};

// psi(x); exactly 0 outside [-1,1]^d. Throws on rank mismatch.
double kernel_eval(const Kernel& k, const std::vector<double>& x);

// Tensor midpoint quadrature of integral psi^2 over [-1,1]^d.
double kernel_l2_norm_sq(const Kernel& k, int quad_res);
// Same rule for integral psi1 * psi2; dimensions must agree.
double kernel_inner_product(const Kernel& k1, const Kernel& k2, int quad_res);

// Default per-axis quadrature resolution by dimension: 2001 / 501 / 121.
int default_quad_res(int d);

// Lattice samples of psi_{t,h} with nonzero weight, plus the empirical norm
// sqrt(sum w^2) used to give the weighted statistic unit null variance.
struct SampledWeights {
    std::vector<std::pair<std::vector<int>, double>> weights;  // (1-based grid index, w)
    double empirical_norm = 0.0;
};

// Throws std::domain_error("degenerate bandwidth") when no lattice point of
// the grid receives nonzero weight.
SampledWeights sampled_weights(const ScaledKernel& sk, const dims_t& dims);

}  // namespace msgd
