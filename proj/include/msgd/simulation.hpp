#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgd/grid.hpp"
#include "msgd/kernels.hpp"

namespace msgd {

// =============================================================================
// Counter-based randomness. Every grid entry is a pure function of
// (seed, stream, entry index), so any partition of the work across threads
// reproduces the same grid. stream doubles as the replication index.
// =============================================================================

struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// Philox 4x32-10 block function (Salmon et al. round structure).
// counter = (index lo, index hi, stream lo, stream hi), key = (seed lo, seed hi).
void philox4x32_10(std::uint32_t ctr[4], std::uint32_t key[2], std::uint32_t out[4]);

// Uniform variate in the open interval (0,1): ((x >> 11) + 0.5) * 2^-53 on the
// first 64 output bits of the block at `index`.
double uniform01(const RngSpec& rng, std::uint64_t index);

// Inverse standard normal CDF (Wichura's AS241 PPND16 rational approximation,
// ~16 significant figures on (0,1)).
double inv_normal_cdf(double p);

// Standard normal variate for one counter position.
double gaussian_at(const RngSpec& rng, std::uint64_t index);

// =============================================================================
// Signals
// =============================================================================

enum class SignalKind { Null, RectSignal, HolderBump };

struct SignalSpec {
    SignalKind kind = SignalKind::Null;
    // RectSignal
    double mu = 0.0;
    Rect rect;
    // HolderBump: f(x) = L * min(h)^beta * psi_beta((x - t)/h) at lattice x
    double beta = 1.0;
    double L = 1.0;
    std::vector<double> t;
    std::vector<double> h;

    static SignalSpec null_signal();
    static SignalSpec rect_signal(double mu, Rect r);
    static SignalSpec holder_bump(double beta, double L, std::vector<double> t, std::vector<double> h);
};

// CLI form: "null" | "rect:mu=<v>,lo=<i;j;...>,hi=<i;j;...>" |
// "bump:beta=<v>,L=<v>,t=<x;y;...>,h=<x;y;...>".
SignalSpec parse_signal_spec(const std::string& s);
std::string signal_spec_string(const SignalSpec& sig);

// =============================================================================
// Grid generation
// =============================================================================

// i.i.d. N(0,1) entries; deterministic in (dims, seed, stream).
GridField gaussian_grid(const dims_t& dims, const RngSpec& rng);

// Deterministic mean grid f at the lattice points.
GridField signal_grid(const dims_t& dims, const SignalSpec& sig);

// Entrywise signal + noise.
GridField observed_grid(const dims_t& dims, const SignalSpec& sig, const RngSpec& rng);

}  // namespace msgd
