#include "msgd/penalties.hpp"

#include <cmath>

namespace msgd {

namespace {
inline void check_scale(double r) {
    if (!(r > 0.0) || r > 1.0) throw std::domain_error("invalid scale");
}
}  // namespace

double gamma_pen(double r) {
    check_scale(r);
    return std::sqrt(2.0 * std::log(1.0 / r));
}

double d_norm(double r) {
    check_scale(r);
    // Arguments stay >= e for r <= 1, so both logs are safe without clamping.
    const double e = std::exp(1.0);
    return std::log(std::log(std::exp(e) / r)) / std::sqrt(std::log(e / r));
}

double gamma_v_pen(double r, double v) {
    check_scale(r);
    if (!(v > 0.0)) throw std::domain_error("invalid scale");
    return std::sqrt(2.0 * v * std::log(1.0 / r));
}

double separation_constant(double beta, double L, int d, double psi_norm_sq) {
    if (!(beta > 0.0) || !(L > 0.0) || d < 1 || !(psi_norm_sq > 0.0))
        throw std::domain_error("nonpositive input");
    const double dd = static_cast<double>(d);
    const double base = 2.0 * dd * std::pow(L, dd / beta) / ((2.0 * beta + dd) * psi_norm_sq);
    return std::pow(base, beta / (2.0 * beta + dd));
}

double minimax_rate(double n, double beta, int d) {
    if (!(n >= 2.0)) throw std::domain_error("n < 2");
    if (!(beta > 0.0) || d < 1) throw std::domain_error("nonpositive input");
    return std::pow(std::log(n) / n, beta / (2.0 * beta + static_cast<double>(d)));
}

double detection_boundary(double b_measure, double n) {
    if (!(b_measure > 0.0) || !(b_measure < 1.0)) throw std::domain_error("b_measure outside (0,1)");
    if (!(n >= 1.0)) throw std::domain_error("n < 1");
    return std::sqrt(2.0 * std::log(1.0 / b_measure)) / std::sqrt(n * b_measure);
}

}  // namespace msgd
