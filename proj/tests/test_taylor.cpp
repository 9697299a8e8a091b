#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsbvp/taylor.hpp"
#include "tsbvp/rng.hpp"
#include "test_support.hpp"

using namespace tsbvp;
using Catch::Approx;

using testing::brute_force_monomial;

TEST_CASE("order zero is identically one") {
    const auto ts = TimeScale::q_scale(4.0, 4);
    for (double t : ts->points())
        for (double s : ts->points())
            CHECK(taylor_monomial(*ts, 0, t, s) == 1.0);
}

TEST_CASE("order one is the difference t - s on integer grids") {
    const auto ts = TimeScale::q_scale(4.0, 4);
    CHECK(taylor_monomial(*ts, 1, 16.0, 4.0) == 12.0);
    for (double t : ts->points())
        for (double s : ts->points())
            CHECK(taylor_monomial(*ts, 1, t, s) == t - s);  // exact on integer points
}

TEST_CASE("diagonal vanishes exactly") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ts = testing::random_scale(rng, 15);
        for (int k = 1; k <= 4; ++k)
            for (double s : ts->points())
                CHECK(taylor_monomial(*ts, k, s, s) == 0.0);
    }
}

TEST_CASE("order two on the geometric scale") {
    const auto ts = TimeScale::q_scale(4.0, 4);
    // mu(0) * h1(0, 0) + mu(1) * h1(1, 0) = 0 + 3 * 1
    CHECK(taylor_monomial(*ts, 2, 4.0, 0.0) == 3.0);
}

TEST_CASE("recursion residual vanishes for all grid pairs") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ts = testing::random_scale(rng, 12);
        for (int k = 0; k < 4; ++k) {
            for (std::size_t is = 0; is < ts->size(); ++is) {
                const double s = ts->point(is);
                const auto row = GridFunction::sample(
                    ts, [&](double tau) { return taylor_monomial(*ts, k, tau, s); });
                for (std::size_t it = 0; it < ts->size(); ++it) {
                    const double t = ts->point(it);
                    const double integral = it >= is ? delta_integral(row, s, t)
                                                     : -delta_integral(row, t, s);
                    const double next = taylor_monomial(*ts, k + 1, t, s);
                    CHECK(next ==
                          Approx(integral).margin(1e-12 * (1.0 + std::abs(integral))));
                }
            }
        }
    }
}

TEST_CASE("matches brute-force nested summation on random scales") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ts = testing::random_scale(rng, 20);
        for (int k = 0; k <= 4; ++k) {
            for (int pair = 0; pair < 6; ++pair) {
                const std::size_t it = rng.index(ts->size());
                const std::size_t is = rng.index(ts->size());
                const double expected = brute_force_monomial(*ts, k, it, is);
                const double got = taylor_monomial(*ts, k, ts->point(it), ts->point(is));
                CHECK(got == Approx(expected).margin(1e-12 * (1.0 + std::abs(expected))));
            }
        }
    }
}

TEST_CASE("signed convention for t below s") {
    const auto ts = TimeScale::q_scale(4.0, 4);
    CHECK(taylor_monomial(*ts, 1, 4.0, 64.0) == -60.0);
    const double bf = brute_force_monomial(*ts, 2, ts->index_of(1.0), ts->index_of(64.0));
    CHECK(taylor_monomial(*ts, 2, 1.0, 64.0) == Approx(bf).margin(1e-12 * (1.0 + std::abs(bf))));
}

TEST_CASE("argument guards") {
    const auto ts = TimeScale::q_scale(4.0, 4);
    CHECK_THROWS_AS(taylor_monomial(*ts, -1, 4.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(taylor_monomial(*ts, 2, 5.0, 0.0), std::domain_error);
}
