#pragma once

#include <stdexcept>

// Scalar calibration functions used by the multiscale statistic and the
// minimax-threshold sanity checks. All logarithms are natural; the scale
// argument r is always the point fraction of a rectangle.

namespace msgd {

enum class PenaltyVariant { Standard, GammaV };

struct PenaltySpec {
    PenaltyVariant variant = PenaltyVariant::Standard;
    double v = 1.0;  // GammaV only

    double effective_v() const { return variant == PenaltyVariant::GammaV ? v : 1.0; }
    bool operator==(const PenaltySpec& o) const { return variant == o.variant && v == o.v; }
};

// Gamma(r) = sqrt(2 log(1/r)); nonincreasing, Gamma(1) = 0.
double gamma_pen(double r);

// D(r) = (log(e/r))^(-1/2) * log log(e^e / r); D(1) = 1, D > 0, D -> 0 as r -> 0.
double d_norm(double r);

// Gamma_V(r) = sqrt(2 v log(1/r)) = sqrt(v) * Gamma(r).
double gamma_v_pen(double r, double v);

// c_* = (2 d L^(d/beta) / ((2 beta + d) ||psi||^2))^(beta / (2 beta + d)).
double separation_constant(double beta, double L, int d, double psi_norm_sq);

// rho_n = ((log n) / n)^(beta / (2 beta + d)); decreasing in n for n >= 3.
double minimax_rate(double n, double beta, int d);

// Critical mean level sqrt(2 log(1/|B|)) / sqrt(n |B|) separating
// undetectable from detectable rectangular signals.
double detection_boundary(double b_measure, double n);

}  // namespace msgd
