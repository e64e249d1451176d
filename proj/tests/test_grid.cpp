#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "msgd/grid.hpp"

using msgd::GridField;
using msgd::Rect;
using msgd::dims_t;

namespace {

// Independent oracle: direct elementwise sum in long double.
long double direct_rect_sum(const GridField& g, const Rect& r) {
    long double acc = 0.0L;
    std::vector<int> idx = r.lo;
    for (;;) {
        acc += static_cast<long double>(g.at(idx));
        int k = static_cast<int>(idx.size()) - 1;
        while (k >= 0) {
            if (idx[k] < r.hi[k]) {
                ++idx[k];
                break;
            }
            idx[k] = r.lo[k];
            --k;
        }
        if (k < 0) break;
    }
    return acc;
}

GridField random_grid(const dims_t& dims, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> unif(-10.0, 10.0);
    GridField g = GridField::zeros(dims);
    for (double& v : g.values) v = unif(gen);
    return g;
}

}  // namespace

TEST_CASE("rect family size closed form") {
    CHECK(msgd::rect_family_size({2}) == 3);
    CHECK(msgd::rect_family_size({3}) == 6);
    CHECK(msgd::rect_family_size({5}) == 15);
    CHECK(msgd::rect_family_size({25}) == 325);
    CHECK(msgd::rect_family_size({2, 2}) == 9);
    CHECK(msgd::rect_family_size({2, 3}) == 18);
    CHECK(msgd::rect_family_size({4, 5}) == 150);
    CHECK(msgd::rect_family_size({2, 2, 2}) == 27);
    CHECK(msgd::rect_family_size({50, 50}) == 1275ull * 1275ull);
}

TEST_CASE("canonical enumeration order on a length-2 axis") {
    const auto rects = msgd::all_rects({2});
    REQUIRE(rects.size() == 3);
    CHECK(rects[0] == Rect({1}, {1}));
    CHECK(rects[1] == Rect({2}, {2}));
    CHECK(rects[2] == Rect({1}, {2}));
}

TEST_CASE("canonical enumeration order on a 2x2 grid") {
    // Scales in lexicographic length order, lo in lexicographic order within
    // each scale.
    const auto rects = msgd::all_rects({2, 2});
    REQUIRE(rects.size() == 9);
    const std::vector<Rect> expect = {
        Rect({1, 1}, {1, 1}), Rect({1, 2}, {1, 2}), Rect({2, 1}, {2, 1}), Rect({2, 2}, {2, 2}),
        Rect({1, 1}, {1, 2}), Rect({2, 1}, {2, 2}),
        Rect({1, 1}, {2, 1}), Rect({1, 2}, {2, 2}),
        Rect({1, 1}, {2, 2}),
    };
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(rects[i] == expect[i]);
}

TEST_CASE("enumeration count matches the closed form, with and without filter") {
    const dims_t dims = {4, 3};
    std::uint64_t n = msgd::enumerate_rects(dims, nullptr, [](const Rect&) {});
    CHECK(n == msgd::rect_family_size(dims));
    CHECK(n == 60);  // 10 * 6

    const auto filt = msgd::side_bounds_filter(2, 3);
    // l1 in {2,3}, l2 in {2,3}: (3 + 2) * (2 + 1) = 15 rects.
    std::uint64_t nf = 0;
    msgd::enumerate_rects(dims, filt, [&](const Rect& r) {
        ++nf;
        for (int l : r.lengths()) {
            CHECK(l >= 2);
            CHECK(l <= 3);
        }
    });
    CHECK(nf == 15);
    CHECK(msgd::rect_family_size(dims, filt) == 15);
}

TEST_CASE("side bounds filter edge cases") {
    CHECK(msgd::side_bounds_filter(0, 0) == nullptr);
    const auto only_min = msgd::side_bounds_filter(2, 0);
    REQUIRE(static_cast<bool>(only_min));
    CHECK(only_min({2, 5}));
    CHECK_FALSE(only_min({1, 5}));
    const auto only_max = msgd::side_bounds_filter(0, 3);
    CHECK(only_max({3, 1}));
    CHECK_FALSE(only_max({4, 1}));
}

TEST_CASE("check_rect rejects invalid rectangles") {
    const dims_t dims = {3, 4};
    CHECK_NOTHROW(msgd::check_rect(dims, Rect({1, 1}, {3, 4})));
    CHECK_THROWS_WITH_AS(msgd::check_rect(dims, Rect({0, 1}, {2, 2})), "invalid rectangle",
                         std::out_of_range);
    CHECK_THROWS_WITH_AS(msgd::check_rect(dims, Rect({1, 1}, {4, 4})), "invalid rectangle",
                         std::out_of_range);
    CHECK_THROWS_WITH_AS(msgd::check_rect(dims, Rect({2, 2}, {1, 3})), "invalid rectangle",
                         std::out_of_range);
    CHECK_THROWS_WITH_AS(msgd::check_rect(dims, Rect({1}, {2})), "invalid rectangle",
                         std::out_of_range);
}

TEST_CASE("point fraction is the point-count fraction") {
    const dims_t dims = {4, 5};
    CHECK(msgd::point_fraction(dims, Rect({1, 1}, {2, 2})) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(msgd::point_fraction(dims, Rect({1, 1}, {4, 5})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(msgd::point_fraction(dims, Rect({3, 4}, {3, 4})) ==
          doctest::Approx(1.0 / 20.0).epsilon(1e-15));
    CHECK(msgd::point_fraction(dims, std::vector<int>{2, 5}) ==
          doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("rect point_count and lengths") {
    const Rect r({2, 1, 3}, {5, 1, 4});
    CHECK(r.point_count() == 8);
    CHECK(r.lengths() == std::vector<int>{4, 1, 2});
}

TEST_CASE("prefix sums match direct summation over every rectangle") {
    const std::vector<dims_t> shapes = {{7}, {5, 6}, {3, 4, 5}};
    unsigned seed = 1234;
    for (const auto& dims : shapes) {
        const GridField g = random_grid(dims, seed++);
        const auto table = msgd::build_prefix(g);
        msgd::enumerate_rects(dims, nullptr, [&](const Rect& r) {
            const double fast = msgd::rect_sum(table, r);
            const long double slow = direct_rect_sum(g, r);
            CHECK(std::fabs(fast - static_cast<double>(slow)) <= 1e-9);
        });
    }
}

TEST_CASE("rect_sum is additive across an axis split") {
    const dims_t dims = {3, 4, 5};
    const GridField g = random_grid(dims, 99);
    const auto table = msgd::build_prefix(g);
    const double whole = msgd::rect_sum(table, Rect({1, 1, 1}, {3, 4, 5}));
    const double left = msgd::rect_sum(table, Rect({1, 1, 1}, {3, 2, 5}));
    const double right = msgd::rect_sum(table, Rect({1, 3, 1}, {3, 4, 5}));
    CHECK(std::fabs(whole - (left + right)) <= 1e-9);
}

TEST_CASE("prefix table zero face and corners") {
    const GridField g = random_grid({3, 3}, 7);
    const auto table = msgd::build_prefix(g);
    CHECK(table.cum_at({0, 0}) == 0.0);
    CHECK(table.cum_at({0, 3}) == 0.0);
    CHECK(table.cum_at({2, 0}) == 0.0);
    // Full-corner entry equals the total sum.
    long double total = 0.0L;
    for (double v : g.values) total += v;
    CHECK(table.cum_at({3, 3}) == doctest::Approx(static_cast<double>(total)).epsilon(1e-13));
    CHECK_THROWS_AS(table.cum_at({4, 0}), std::out_of_range);
    CHECK_THROWS_AS(table.cum_at({0}), std::invalid_argument);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_WITH_AS(GridField::from_values({2, 2}, {1.0, 2.0, 3.0}),
                         "grid: value count does not match dims", std::invalid_argument);
    CHECK_THROWS_WITH_AS(GridField::from_values({2}, {1.0, std::nan("")}),
                         "grid: non-finite value", std::invalid_argument);
    const GridField z = GridField::zeros({2, 3});
    CHECK(z.count() == 6);
    CHECK(z.d() == 2);
    for (double v : z.values) CHECK(v == 0.0);
    CHECK_THROWS_AS(GridField::zeros({0, 2}), std::invalid_argument);
}

TEST_CASE("prefix build rejects unrepresentable totals") {
    const GridField g = GridField::from_values({2}, {1e308, 1e308});
    CHECK_THROWS_WITH_AS(msgd::build_prefix(g), "overflow", std::overflow_error);
}

TEST_CASE("long-axis compensated accumulation stays accurate") {
    // 600 > 512 triggers the Neumaier path; alternating large/small values
    // are a classic cancellation stress.
    const int n = 600;
    GridField g = GridField::zeros({n});
    long double total = 0.0L;
    for (int i = 0; i < n; ++i) {
        const double v = (i % 2 == 0) ? 1e12 + i : -(1e12 - i);
        g.values[static_cast<std::size_t>(i)] = v;
        total += v;
    }
    const auto table = msgd::build_prefix(g);
    const double whole = msgd::rect_sum(table, Rect({1}, {n}));
    CHECK(whole == doctest::Approx(static_cast<double>(total)).epsilon(1e-12));
}
