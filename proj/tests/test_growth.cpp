#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsbvp/growth.hpp"
#include "tsbvp/rng.hpp"
#include "test_support.hpp"

using namespace tsbvp;
using Catch::Approx;

namespace {

GrowthEnvelope envelope_with_bound(double B, int order,
                                   const std::vector<std::vector<double>>& g_exponents) {
    GrowthEnvelope env;
    env.B = B;
    env.order = order;
    env.b0 = [B](double) { return B; };
    for (int j = 0; j < order; ++j)
        env.f_terms.push_back({[B](double) { return B; }, 1.0});
    for (const auto& exps : g_exponents) {
        BoundaryEnvelope be;
        be.a0 = B;
        for (double l : exps)
            be.terms.push_back({B, l});
        env.g_terms.push_back(be);
    }
    return env;
}

}  // namespace

TEST_CASE("growth bound on the bundled example is exactly 4") {
    CHECK(growth_bound(testing::example_envelope()) == 4.0);
}

TEST_CASE("growth bound degenerate and hand-computed cases") {
    CHECK(growth_bound(envelope_with_bound(0.0, 2, {{1.0, 2.0}})) == 0.0);
    // interior: 2*2 + 3*2^4 = 52; boundary blocks give 8 and 16
    CHECK(growth_bound(envelope_with_bound(2.0, 3, {{1.0}, {1.0, 2.0}})) == 52.0);
}

TEST_CASE("growth bound is monotone in B") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const int order = 1 + static_cast<int>(rng.index(3));
        std::vector<std::vector<double>> g_exponents;
        for (int j = 1; j < order; ++j) {
            std::vector<double> exps;
            const std::size_t p = 1 + rng.index(3);
            for (std::size_t k = 0; k < p; ++k)
                exps.push_back(rng.uniform(0.0, 3.0));
            g_exponents.push_back(exps);
        }
        double prev = -1.0;
        for (double B = 0.0; B <= 2.5; B += 0.25) {
            const double bound = growth_bound(envelope_with_bound(B, order, g_exponents));
            CHECK(bound >= prev);
            prev = bound;
        }
    }
}

TEST_CASE("interior envelope evaluation") {
    const auto env = testing::example_envelope();
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(interior_envelope(env, 7.0, zeros) == 1.0);
    const std::vector<double> xs{10.0, 2.0};
    CHECK(interior_envelope(env, 7.0, xs) == Approx(1.3).epsilon(1e-15));

    GrowthEnvelope zero_env = envelope_with_bound(0.0, 2, {{1.0}});
    CHECK(interior_envelope(zero_env, 1.0, xs) == 0.0);
}

TEST_CASE("boundary envelope evaluation") {
    const auto env = testing::example_envelope();
    CHECK(boundary_envelope(env, 1, 0.0) == 0.5);
    CHECK(boundary_envelope(env, 1, 2.0) == Approx(13.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(boundary_envelope(env, 2, 1.0), std::domain_error);
    CHECK_THROWS_AS(boundary_envelope(env, 0, 1.0), std::domain_error);
}

TEST_CASE("envelopes are even and monotone in magnitude") {
    const auto env = testing::example_envelope();
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = rng.uniform(0.0, 8.0);
        const double b = a + rng.uniform(0.0, 4.0);
        const std::vector<double> pos{a, b};
        const std::vector<double> neg{-a, -b};
        CHECK(interior_envelope(env, 1.0, pos) == interior_envelope(env, 1.0, neg));
        CHECK(boundary_envelope(env, 1, a) == boundary_envelope(env, 1, -a));
        const std::vector<double> larger{a + 1.0, b};
        CHECK(interior_envelope(env, 1.0, larger) >= interior_envelope(env, 1.0, pos));
        CHECK(boundary_envelope(env, 1, b) >= boundary_envelope(env, 1, a));
    }
}

TEST_CASE("sampling check passes on the bundled example") {
    const auto p = testing::example_problem();
    GrowthSampler sampler;  // box [-10, 10], 10000 samples, seed 0
    const auto report = check_growth(*p.scale, p.order, p.f, p.g, *p.envelope, sampler);
    CHECK(report.pass);
    CHECK(report.side_pass);
    CHECK(report.worst_margin > 0.0);
    CHECK_FALSE(report.witness.has_value());
}

TEST_CASE("sampling check finds quadratic growth violating a linear envelope") {
    const auto ts = TimeScale::uniform(1.0, 4.0);
    GrowthEnvelope env;
    env.B = 1.0;
    env.order = 1;
    env.b0 = [](double) { return 0.0; };
    env.f_terms = {{[](double) { return 1.0; }, 1.0}};
    const auto f = [](double, std::span<const double> xs) { return xs[0] * xs[0]; };
    GrowthSampler sampler;
    sampler.box_lo = -2.0;
    sampler.box_hi = 2.0;
    const auto report = check_growth(*ts, 1, f, {}, env, sampler);
    CHECK_FALSE(report.pass);
    REQUIRE(report.witness.has_value());
    CHECK(report.witness->kind == "f");
    CHECK(std::abs(report.witness->x[0]) > 1.0);
    CHECK(report.worst_margin < 0.0);
}

TEST_CASE("sampling check passes for the zero function") {
    const auto ts = TimeScale::uniform(1.0, 4.0);
    const auto env = envelope_with_bound(1.0, 1, {});
    const auto f = [](double, std::span<const double>) { return 0.0; };
    const auto report = check_growth(*ts, 1, f, {}, env, GrowthSampler{});
    CHECK(report.pass);
}

TEST_CASE("sampling check is deterministic given the seed") {
    const auto p = testing::example_problem();
    GrowthSampler sampler;
    sampler.samples = 500;
    const auto a = check_growth(*p.scale, p.order, p.f, p.g, *p.envelope, sampler);
    const auto b = check_growth(*p.scale, p.order, p.f, p.g, *p.envelope, sampler);
    CHECK(a.worst_margin == b.worst_margin);
}

TEST_CASE("radii ordering") {
    BallParams bp = testing::example_params();
    CHECK(check_radii(bp));  // 4 < 5 < 10

    bp.L = bp.r;
    CHECK_FALSE(check_radii(bp));

    BallParams small{1.0, 2.0, 3.0, 1.0, 1.0, {}};
    CHECK(check_radii(small));

    BallParams bad{-1.0, 2.0, 3.0, 1.0, 1.0, {}};
    CHECK_THROWS_AS(check_radii(bad), std::domain_error);
}
