// Extended acceptance gate: the m=100 runs. A single R=3000 null calibration
// of five statistics at m=100 feeds all three criteria here, so the heavy
// enumeration pass happens exactly once (on one core this takes roughly
// 15 minutes; the power tables add about the same again).
//
// Disabled unless MSGD_EXTENDED=1, in which case exit code 77 marks the run
// as skipped. Exit status is nonzero when a criterion is out of band.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "msgd/calibration.hpp"
#include "msgd/statistics.hpp"

using namespace msgd;

namespace {

int g_failures = 0;
using clk = std::chrono::steady_clock;

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

void verdict(int criterion, bool ok, const std::string& text) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, text.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void info(const std::string& text) {
    std::printf("[info] %s\n", text.c_str());
    std::fflush(stdout);
}

double elapsed(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

std::string band(const std::string& label, double measured, double center, double tol,
                 bool& ok) {
    const bool in = std::fabs(measured - center) <= tol + 1e-12;
    ok = ok && in;
    char spec[64];
    std::snprintf(spec, sizeof spec, "%g+/-%g", center, tol);
    return label + "=" + fmt(measured) + " (" + spec + (in ? "" : " OUT") + ")";
}

const int kThreads = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

}  // namespace

int main() {
    const char* flag = std::getenv("MSGD_EXTENDED");
    if (flag == nullptr || std::string(flag) != "1") {
        std::printf("extended gate skipped; set MSGD_EXTENDED=1 to run the m=100 suite "
                    "(roughly half an hour on one core)\n");
        return 77;
    }

    std::printf("acceptance gate: m=100 extended suite\n");
    std::printf("worker threads: %d\n", kThreads);
    const auto t0 = clk::now();
    const dims_t dims{100, 100};

    StatisticSpec ms, scan, alr, star1, star4;
    ms.kind = StatKind::Multiscale;
    scan.kind = StatKind::Scan;
    alr.kind = StatKind::ALR;
    star1.kind = StatKind::MultiscaleStar;
    star4.kind = StatKind::MultiscaleStar;
    star4.penalty.variant = PenaltyVariant::GammaV;
    star4.penalty.v = 4.0;

    // One shared null pass for every statistic referenced below.
    const std::vector<StatisticSpec> specs = {ms, scan, alr, star1, star4};
    const auto recs = calibrate_multi(dims, specs, {0.05}, 3000, 101, kThreads);
    info("m=100 R=3000 calibration of 5 statistics took " + fmt(elapsed(t0), 1) + " s");

    // Criterion 1, extended part: the published critical value at m=100.
    {
        bool ok = true;
        const std::string text = "multiscale kappa_0.05, R=3000, d=2: " +
                                 band("m=100", recs[0].quantiles.at(0.05), 3.31, 0.10, ok);
        verdict(1, ok, text);
    }

    // Criterion 3: power spot checks at m=100.
    {
        const auto t3 = clk::now();
        const auto rows = compare_tests(dims, {{100, 0.025}, {8, 0.40}}, {ms, scan, alr},
                                        {recs[0], recs[1], recs[2]}, 0.05, 1000, 9090,
                                        kThreads);
        // rows: cells outer, specs inner
        bool ok = true;
        const std::string text =
            "m=100 power, R=1000: k=100,mu=0.025: " +
            band("ms", rows[0].power, 0.96, 0.05, ok) + ", " +
            band("scan", rows[1].power, 0.45, 0.08, ok) + "; k=8,mu=0.40: " +
            band("ms", rows[3].power, 0.96, 0.05, ok) + ", " +
            band("alr", rows[5].power, 0.50, 0.08, ok);
        verdict(3, ok, text);
        info("criterion 3 took " + fmt(elapsed(t3), 1) + " s");
    }

    // Criterion 9: a penalty constant V=4 must cost detectable power against
    // the V=1 penalty on a small-scale signal, beyond Monte Carlo noise.
    {
        const auto t9 = clk::now();
        const auto rows = compare_tests(dims, {{8, 0.35}}, {star1, star4},
                                        {recs[3], recs[4]}, 0.05, 1000, 2718, kThreads);
        const double p1 = rows[0].power, p4 = rows[1].power;
        const double se1 = rows[0].half_width / 1.96, se4 = rows[1].half_width / 1.96;
        const double margin = 2.0 * std::sqrt(se1 * se1 + se4 * se4);
        const bool ok = (p1 - p4) > margin;
        verdict(9, ok,
                "m=100, k=8, mu=0.35: power V=1 " + fmt(p1) + " vs V=4 " + fmt(p4) +
                    "; difference " + fmt(p1 - p4) + " needs > " + fmt(margin) +
                    " (2 combined SEs)");
        info("criterion 9 took " + fmt(elapsed(t9), 1) + " s");
    }

    std::printf("%s: %d criterion(s) out of band, total %.1f s\n",
                g_failures == 0 ? "ALL PASS" : "RED", g_failures, elapsed(t0));
    return g_failures == 0 ? 0 : 1;
}
