#include "msgd/simulation.hpp"

#include <cmath>
#include <cstdio>

namespace msgd {

// =============================================================================
// Philox 4x32-10
// =============================================================================

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hilo(std::uint32_t a, std::uint32_t b, std::uint32_t* lo, std::uint32_t* hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *lo = static_cast<std::uint32_t>(p);
    *hi = static_cast<std::uint32_t>(p >> 32);
}

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mul_hilo(kPhiloxM4x32A, c[0], &lo0, &hi0);
    mul_hilo(kPhiloxM4x32B, c[2], &lo1, &hi1);
    const std::uint32_t r0 = hi1 ^ c[1] ^ k[0];
    const std::uint32_t r1 = lo1;
    const std::uint32_t r2 = hi0 ^ c[3] ^ k[1];
    const std::uint32_t r3 = lo0;
    c[0] = r0;
    c[1] = r1;
    c[2] = r2;
    c[3] = r3;
}

}  // namespace

void philox4x32_10(std::uint32_t ctr[4], std::uint32_t key[2], std::uint32_t out[4]) {
    std::uint32_t c[4] = {ctr[0], ctr[1], ctr[2], ctr[3]};
    std::uint32_t k[2] = {key[0], key[1]};
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k);
        k[0] += kPhiloxW32A;
        k[1] += kPhiloxW32B;
    }
    out[0] = c[0];
    out[1] = c[1];
    out[2] = c[2];
    out[3] = c[3];
}

double uniform01(const RngSpec& rng, std::uint64_t index) {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(rng.stream),
        static_cast<std::uint32_t>(rng.stream >> 32),
    };
    std::uint32_t key[2] = {
        static_cast<std::uint32_t>(rng.seed),
        static_cast<std::uint32_t>(rng.seed >> 32),
    };
    std::uint32_t out[4];
    philox4x32_10(ctr, key, out);
    const std::uint64_t x = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// =============================================================================
// AS241 PPND16 (Wichura 1988): inverse normal CDF to ~1e-16 relative.
// =============================================================================

double inv_normal_cdf(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("inv_normal_cdf: p outside (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double gaussian_at(const RngSpec& rng, std::uint64_t index) {
    return inv_normal_cdf(uniform01(rng, index));
}

// =============================================================================
// Signals
// =============================================================================

SignalSpec SignalSpec::null_signal() { return SignalSpec{}; }

SignalSpec SignalSpec::rect_signal(double mu, Rect r) {
    SignalSpec s;
    s.kind = SignalKind::RectSignal;
    s.mu = mu;
    s.rect = std::move(r);
    return s;
}

SignalSpec SignalSpec::holder_bump(double beta, double L, std::vector<double> t, std::vector<double> h) {
    if (!(beta > 0.0) || beta > 1.0) throw std::invalid_argument("signal: beta must lie in (0,1]");
    if (t.size() != h.size() || t.empty()) throw std::invalid_argument("signal: t/h rank mismatch");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(h[k] > 0.0) || h[k] > 0.5) throw std::invalid_argument("signal: h outside (0,1/2]");
        if (t[k] < h[k] || t[k] > 1.0 - h[k])
            throw std::invalid_argument("signal: bump center must satisfy t in A_h");
    }
    SignalSpec s;
    s.kind = SignalKind::HolderBump;
    s.beta = beta;
    s.L = L;
    s.t = std::move(t);
    s.h = std::move(h);
    return s;
}

namespace {

std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(';', pos);
        if (next == std::string::npos) next = s.size();
        const std::string tok = s.substr(pos, next - pos);
        if (tok.empty()) throw std::invalid_argument("signal spec: empty list element");
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("signal spec: bad number '" + tok + "'");
        pos = next + 1;
        if (next == s.size()) break;
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_real_list(s)) {
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) throw std::invalid_argument("signal spec: expected integer");
        out.push_back(i);
    }
    return out;
}

// key=value fields separated by commas, after the "<kind>:" prefix.
std::vector<std::pair<std::string, std::string>> parse_fields(const std::string& body) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t next = body.find(',', pos);
        if (next == std::string::npos) next = body.size();
        const std::string field = body.substr(pos, next - pos);
        const std::size_t eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("signal spec: expected key=value");
        out.emplace_back(field.substr(0, eq), field.substr(eq + 1));
        pos = next + 1;
    }
    return out;
}

}  // namespace

SignalSpec parse_signal_spec(const std::string& s) {
    if (s == "null") return SignalSpec::null_signal();
    if (s.rfind("rect:", 0) == 0) {
        double mu = 0.0;
        std::vector<int> lo, hi;
        bool have_mu = false;
        for (auto& [k, v] : parse_fields(s.substr(5))) {
            if (k == "mu") {
                mu = std::stod(v);
                have_mu = true;
            } else if (k == "lo")
                lo = parse_int_list(v);
            else if (k == "hi")
                hi = parse_int_list(v);
            else
                throw std::invalid_argument("signal spec: unknown field '" + k + "'");
        }
        if (!have_mu || lo.empty() || lo.size() != hi.size())
            throw std::invalid_argument("signal spec: rect needs mu, lo, hi");
        return SignalSpec::rect_signal(mu, Rect{lo, hi});
    }
    if (s.rfind("bump:", 0) == 0) {
        double beta = 0.0, L = 0.0;
        bool have_beta = false, have_L = false;
        std::vector<double> t, h;
        for (auto& [k, v] : parse_fields(s.substr(5))) {
            if (k == "beta") {
                beta = std::stod(v);
                have_beta = true;
            } else if (k == "L") {
                L = std::stod(v);
                have_L = true;
            } else if (k == "t")
                t = parse_real_list(v);
            else if (k == "h")
                h = parse_real_list(v);
            else
                throw std::invalid_argument("signal spec: unknown field '" + k + "'");
        }
        if (!have_beta || !have_L || t.empty() || t.size() != h.size())
            throw std::invalid_argument("signal spec: bump needs beta, L, t, h");
        return SignalSpec::holder_bump(beta, L, std::move(t), std::move(h));
    }
    throw std::invalid_argument("signal spec: unknown kind in '" + s + "'");
}

std::string signal_spec_string(const SignalSpec& sig) {
    char buf[64];
    switch (sig.kind) {
        case SignalKind::Null:
            return "null";
        case SignalKind::RectSignal: {
            std::string out = "rect:mu=";
            std::snprintf(buf, sizeof buf, "%.17g", sig.mu);
            out += buf;
            out += ",lo=" + join_ints(sig.rect.lo, ';');
            out += ",hi=" + join_ints(sig.rect.hi, ';');
            return out;
        }
        case SignalKind::HolderBump: {
            std::string out = "bump:beta=";
            std::snprintf(buf, sizeof buf, "%.17g", sig.beta);
            out += buf;
            std::snprintf(buf, sizeof buf, ",L=%.17g", sig.L);
            out += buf;
            out += ",t=";
            for (std::size_t k = 0; k < sig.t.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%s%.17g", k ? ";" : "", sig.t[k]);
                out += buf;
            }
            out += ",h=";
            for (std::size_t k = 0; k < sig.h.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%s%.17g", k ? ";" : "", sig.h[k]);
                out += buf;
            }
            return out;
        }
    }
    return "null";
}

// =============================================================================
// Grid generation
// =============================================================================

GridField gaussian_grid(const dims_t& dims, const RngSpec& rng) {
    GridField g = GridField::zeros(dims);
    const std::size_t n = g.values.size();
    for (std::size_t i = 0; i < n; ++i) g.values[i] = gaussian_at(rng, static_cast<std::uint64_t>(i));
    return g;
}

GridField signal_grid(const dims_t& dims, const SignalSpec& sig) {
    GridField g = GridField::zeros(dims);
    switch (sig.kind) {
        case SignalKind::Null:
            break;
        case SignalKind::RectSignal: {
            check_rect(dims, sig.rect);
            const int d = static_cast<int>(dims.size());
            std::vector<int> rel(d, 1);
            dims_t rel_lims(d);
            for (int k = 0; k < d; ++k) rel_lims[k] = sig.rect.hi[k] - sig.rect.lo[k] + 1;
            std::vector<int> idx(d);
            do {
                for (int k = 0; k < d; ++k) idx[k] = sig.rect.lo[k] + rel[k] - 1;
                g.at(idx) = sig.mu;
            } while (odometer_next(rel, rel_lims));
            break;
        }
        case SignalKind::HolderBump: {
            const int d = static_cast<int>(dims.size());
            if (static_cast<int>(sig.t.size()) != d) throw std::invalid_argument("signal: rank mismatch");
            double hmin = sig.h[0];
            for (double hv : sig.h) hmin = std::min(hmin, hv);
            const double amp = sig.L * std::pow(hmin, sig.beta);
            const Kernel psi = Kernel::holder(sig.beta, d);
            std::vector<int> idx(d, 1);
            std::vector<double> z(d);
            do {
                for (int k = 0; k < d; ++k)
                    z[k] = (static_cast<double>(idx[k]) / static_cast<double>(dims[k]) - sig.t[k]) / sig.h[k];
                const double v = kernel_eval(psi, z);
                if (v != 0.0) g.at(idx) = amp * v;
            } while (odometer_next(idx, dims));
            break;
        }
    }
    return g;
}

GridField observed_grid(const dims_t& dims, const SignalSpec& sig, const RngSpec& rng) {
    GridField g = gaussian_grid(dims, rng);
    if (sig.kind == SignalKind::Null) return g;
    const GridField f = signal_grid(dims, sig);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += f.values[i];
    return g;
}

}  // namespace msgd
