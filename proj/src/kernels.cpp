#include "msgd/kernels.hpp"

#include <cmath>
#include <cstdio>

namespace msgd {

Kernel Kernel::indicator(int d) {
    if (d < 1) throw std::invalid_argument("kernel: d >= 1 required");
    Kernel k;
    k.kind = KernelKind::Indicator;
    k.d = d;
    return k;
}

Kernel Kernel::holder(double beta, int d) {
    if (d < 1) throw std::invalid_argument("kernel: d >= 1 required");
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("kernel: beta must lie in (0,1]");
    Kernel k;
    k.kind = KernelKind::HolderBump;
    k.beta = beta;
    k.d = d;
    return k;
}

std::string Kernel::spec_string() const {
    if (kind == KernelKind::Indicator) return "indicator";
    char buf[48];
    std::snprintf(buf, sizeof buf, "holder:%.17g", beta);
    return buf;
}

Kernel parse_kernel_spec(const std::string& s, int d) {
    if (s == "indicator") return Kernel::indicator(d);
    if (s.rfind("holder:", 0) == 0) {
        const std::string num = s.substr(7);
        std::size_t used = 0;
        double beta = 0.0;
        try {
            beta = std::stod(num, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("kernel spec: bad beta in '" + s + "'");
        }
        if (used != num.size()) throw std::invalid_argument("kernel spec: bad beta in '" + s + "'");
        return Kernel::holder(beta, d);
    }
    throw std::invalid_argument("kernel spec: expected 'indicator' or 'holder:<beta>'");
}

ScaledKernel::ScaledKernel(Kernel k, std::vector<double> center, std::vector<double> bandwidth)
    : base(k), t(std::move(center)), h(std::move(bandwidth)) {
    if (static_cast<int>(t.size()) != base.d || static_cast<int>(h.size()) != base.d)
        throw std::invalid_argument("scaled kernel: rank mismatch");
    for (int i = 0; i < base.d; ++i) {
        if (!(h[i] > 0.0) || h[i] > 0.5) throw std::invalid_argument("scaled kernel: h outside (0, 1/2]");
        if (t[i] < 0.0 || t[i] > 1.0) throw std::invalid_argument("scaled kernel: t outside [0,1]");
    }
}

double kernel_eval(const Kernel& k, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != k.d) throw std::invalid_argument("kernel eval: rank mismatch");
    for (double xi : x)
        if (std::fabs(xi) > 1.0) return 0.0;
    if (k.kind == KernelKind::Indicator) return 1.0;
    double nsq = 0.0;
    for (double xi : x) nsq += xi * xi;
    const double n = std::sqrt(nsq);
    if (n > 1.0) return 0.0;
    return 1.0 - std::pow(n, k.beta);
}

int default_quad_res(int d) {
    switch (d) {
        case 1: return 2001;
        case 2: return 501;
        default: return 121;
    }
}

namespace {

// Tensor midpoint rule over [-1,1]^d; accumulation in long double, fixed
// row-major order, so results are deterministic.
template <class F>
double midpoint_quad(int d, int res, F&& f) {
    if (res < 64) throw std::invalid_argument("quadrature: res >= 64 required");
    const double cell = 2.0 / static_cast<double>(res);
    std::vector<int> idx(d, 1);
    dims_t lims(d, res);
    std::vector<double> x(d);
    long double acc = 0.0L;
    do {
        for (int k = 0; k < d; ++k) x[k] = -1.0 + (2.0 * (idx[k] - 1) + 1.0) / static_cast<double>(res);
        acc += static_cast<long double>(f(x));
    } while (odometer_next(idx, lims));
    double w = 1.0;
    for (int k = 0; k < d; ++k) w *= cell;
    return static_cast<double>(acc) * w;
}

}  // namespace

double kernel_l2_norm_sq(const Kernel& k, int quad_res) {
    return midpoint_quad(k.d, quad_res, [&](const std::vector<double>& x) {
        const double v = kernel_eval(k, x);
        return v * v;
    });
}

double kernel_inner_product(const Kernel& k1, const Kernel& k2, int quad_res) {
    if (k1.d != k2.d) throw std::invalid_argument("inner product: dimension mismatch");
    return midpoint_quad(k1.d, quad_res, [&](const std::vector<double>& x) {
        return kernel_eval(k1, x) * kernel_eval(k2, x);
    });
}

SampledWeights sampled_weights(const ScaledKernel& sk, const dims_t& dims) {
    check_dims(dims);
    const int d = sk.base.d;
    if (static_cast<int>(dims.size()) != d) throw std::invalid_argument("sampled weights: rank mismatch");

    // Candidate lattice window: indices i with i/m inside [t-h, t+h].
    dims_t win_lo(d), win_hi(d);
    for (int k = 0; k < d; ++k) {
        const double m = static_cast<double>(dims[k]);
        int lo = static_cast<int>(std::ceil((sk.t[k] - sk.h[k]) * m));
        int hi = static_cast<int>(std::floor((sk.t[k] + sk.h[k]) * m));
        if (lo < 1) lo = 1;
        if (hi > dims[k]) hi = dims[k];
        win_lo[k] = lo;
        win_hi[k] = hi;
        if (lo > hi) throw std::domain_error("degenerate bandwidth");
    }

    SampledWeights out;
    std::vector<int> idx = win_lo;
    std::vector<double> z(d);
    long double norm_sq = 0.0L;
    // odometer over [win_lo, win_hi]: reuse odometer_next by shifting
    std::vector<int> rel(d, 1);
    dims_t rel_lims(d);
    for (int k = 0; k < d; ++k) rel_lims[k] = win_hi[k] - win_lo[k] + 1;
    do {
        for (int k = 0; k < d; ++k) {
            idx[k] = win_lo[k] + rel[k] - 1;
            z[k] = (static_cast<double>(idx[k]) / static_cast<double>(dims[k]) - sk.t[k]) / sk.h[k];
        }
        const double w = kernel_eval(sk.base, z);
        if (w != 0.0) {
            out.weights.emplace_back(idx, w);
            norm_sq += static_cast<long double>(w) * w;
        }
    } while (odometer_next(rel, rel_lims));

    if (out.weights.empty()) throw std::domain_error("degenerate bandwidth");
    out.empirical_norm = std::sqrt(static_cast<double>(norm_sq));
    return out;
}

}  // namespace msgd
