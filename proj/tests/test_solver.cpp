#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tsbvp/report.hpp"
#include "tsbvp/solver.hpp"
#include "test_support.hpp"

using namespace tsbvp;
using Catch::Approx;

namespace {

// Test-local Gaussian elimination, kept separate from the library's solver
// so linear problems are checked through an independent path.
std::vector<double> gauss_solve(std::vector<std::vector<double>> m, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[pivot][c]))
                pivot = r;
        std::swap(m[c], m[pivot]);
        std::swap(b[c], b[pivot]);
        REQUIRE(m[c][c] != 0.0);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t k = c; k < n; ++k)
                m[r][k] -= f * m[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double sum = b[r];
        for (std::size_t k = r + 1; k < n; ++k)
            sum -= m[r][k] * x[k];
        x[r] = sum / m[r][r];
    }
    return x;
}

// Root of x + g1(x) on [-1, 0] by plain bisection.
double bisect_scalar_root() {
    const auto phi = [](double x) { return x + testing::example_g1(x); };
    double lo = -1.0, hi = 0.0;
    REQUIRE(phi(lo) < 0.0);
    REQUIRE(phi(hi) > 0.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("collocation set") {
    CHECK(collocation_set(testing::example_problem()) ==
          std::vector<double>{4.0, 16.0, 64.0});

    const auto first_order = testing::zero_problem(TimeScale::from_points({0.0, 1.0, 4.0}), 1);
    CHECK(collocation_set(first_order) == std::vector<double>{1.0});

    const auto uniform = testing::zero_problem(TimeScale::uniform(1.0, 4.0), 2);
    CHECK(collocation_set(uniform) == std::vector<double>{2.0, 3.0});

    const auto tiny = testing::zero_problem(TimeScale::from_points({0.0, 1.0, 4.0}), 2);
    CHECK(collocation_set(tiny).empty());
}

TEST_CASE("assembled residual flattens the bundle") {
    const auto p = testing::example_problem();
    const auto at_zero = assemble_residual(p, GridFunction::zeros(p.scale));
    CHECK(at_zero == std::vector<double>{1.0, 1.0, 1.0, -0.5, 0.0, 0.0});

    Rng rng(61);
    const auto u = testing::random_field(p.scale, rng);
    const auto flat = assemble_residual(p, u);
    const auto bundle = residual_bundle(p, u).flatten();
    CHECK(flat == bundle);
}

TEST_CASE("newton on the zero problem returns the zero function") {
    const auto p = testing::zero_problem(TimeScale::uniform(1.0, 5.0), 2);
    SolverConfig cfg;
    cfg.tol_residual = 1e-13;
    Rng rng(62);
    for (int start = 0; start < 20; ++start) {
        const auto u0 = testing::random_field_with_norm(p.scale, p.order,
                                                        rng.uniform(0.0, 10.0), rng);
        const auto result = newton_solve(p, u0, cfg);
        REQUIRE(result.ok());
        CHECK(result.record->residual_inf < 1e-12);
        CHECK(sup_norm(result.record->u) < 1e-12);
    }
}

TEST_CASE("newton reproduces the bundled example's scalar root") {
    const auto p = testing::example_problem();
    const auto result = newton_solve(p, GridFunction::zeros(p.scale), SolverConfig{});
    REQUIRE(result.ok());
    const auto& rec = *result.record;
    CHECK(rec.residual_inf < 1e-10);
    CHECK(std::abs(rec.u.value_at(1.0)) <= 1e-10);
    CHECK(std::abs(rec.u.value_at(256.0)) <= 1e-10);
    const double root = bisect_scalar_root();
    CHECK(root > -1.0);
    CHECK(root < 0.0);
    CHECK(rec.u.value_at(0.0) == Approx(root).margin(1e-10));
}

TEST_CASE("newton matches a dense direct solve on a linear problem") {
    const double c = 1.0, a1 = 0.3, a2 = -0.2;
    auto p = testing::zero_problem(TimeScale::uniform(1.0, 5.0), 2);
    p.f = [=](double, std::span<const double> xs) { return c + a1 * xs[0] + a2 * xs[1]; };
    p.g = {[](double x) { return 0.5 * x + 0.1; }};

    // Hand-built difference system on the unit-step grid.
    const std::size_t n = 6;
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    std::vector<double> q(n, 0.0);
    for (std::size_t row = 0; row < 3; ++row) {
        const std::size_t mm = row + 1;  // rho of the collocation point
        m[row][mm] += 1.0 + a1 - a2;
        m[row][mm + 1] += -2.0 + a2;
        m[row][mm + 2] += 1.0;
        q[row] = c;
    }
    m[3][0] = -1.5;
    m[3][1] = 1.0;
    q[3] = -0.1;
    m[4][1] = 1.0;
    m[5][5] = 1.0;
    std::vector<double> negq(n);
    for (std::size_t i = 0; i < n; ++i)
        negq[i] = -q[i];
    const auto direct = gauss_solve(m, negq);

    const auto result = newton_solve(p, GridFunction::zeros(p.scale), SolverConfig{});
    REQUIRE(result.ok());
    for (std::size_t i = 0; i < n; ++i)
        CHECK(result.record->u.value(i) == Approx(direct[i]).margin(1e-10));
}

TEST_CASE("newton solves a first-order problem against a direct solve") {
    const double c = 1.0, a1 = 0.2;
    auto p = testing::zero_problem(TimeScale::uniform(1.0, 5.0), 1);
    p.f = [=](double, std::span<const double> xs) { return c + a1 * xs[0]; };

    // Interior rows at t = 1..4: -(u_i - u_{i-1}) + c + a1 * u_{i-1} = 0.
    const std::size_t n = 6;
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    std::vector<double> negq(n, 0.0);
    for (std::size_t row = 0; row < 4; ++row) {
        m[row][row] = 1.0 + a1;
        m[row][row + 1] = -1.0;
        negq[row] = -c;
    }
    m[4][0] = 1.0;
    m[5][5] = 1.0;
    const auto direct = gauss_solve(m, negq);

    const auto result = newton_solve(p, GridFunction::zeros(p.scale), SolverConfig{});
    REQUIRE(result.ok());
    for (std::size_t i = 0; i < n; ++i)
        CHECK(result.record->u.value(i) == Approx(direct[i]).margin(1e-10));
    CHECK(result.record->u.value(1) == Approx(1.0).margin(1e-10));
    CHECK(result.record->u.value(2) == Approx(2.2).margin(1e-10));
}

TEST_CASE("newton reports a failure on a rank-deficient system") {
    auto p = testing::zero_problem(TimeScale::uniform(1.0, 3.0), 2);
    // Interior equation collapses to u(T) = 0, duplicating a boundary row.
    p.f = [](double, std::span<const double> xs) { return xs[0] + 2.0 * xs[1]; };
    const auto ones = GridFunction::sample(p.scale, [](double) { return 1.0; });
    const auto result = newton_solve(p, ones, SolverConfig{});
    CHECK_FALSE(result.ok());
    CHECK_FALSE(result.diagnostic.empty());
}

TEST_CASE("multistart on the zero problem finds exactly the zero record") {
    auto p = testing::zero_problem(testing::geometric_scale(), 2);
    SolverConfig cfg;
    cfg.n_starts = 20;
    const auto result = multistart_search(p, cfg);
    REQUIRE(result.records.size() == 1);
    CHECK(sup_norm(result.records[0].u) < 1e-9);
    CHECK(result.records[0].shell == Shell::U1);
    CHECK(result.records[0].nonnegative);
    CHECK(result.stats.starts == 20);
    CHECK(result.stats.successes == result.stats.dedup_merges + 1);
}

TEST_CASE("multistart on the bundled example") {
    const auto p = testing::example_problem();
    SolverConfig cfg;
    const auto result = multistart_search(p, cfg);
    REQUIRE(!result.records.empty());
    const double root = bisect_scalar_root();
    for (const auto& rec : result.records) {
        // independent re-verification of every record
        const auto fresh = residual_bundle(p, rec.u);
        CHECK(fresh.max_abs() < cfg.tol_residual);
        CHECK(fresh.max_abs() == rec.residual_inf);
        CHECK(std::abs(rec.u.value_at(1.0)) <= cfg.tol_residual);
        CHECK(std::abs(rec.u.value_at(256.0)) <= cfg.tol_residual);
        CHECK(rec.u.value_at(0.0) == Approx(root).margin(1e-10));
        CHECK(cn_norm(rec.u, p.order) == rec.x_norm);
        CHECK(shell_of(rec.x_norm, *p.params) == rec.shell);
    }
}

TEST_CASE("multistart is deterministic and thread-count independent") {
    const auto p = testing::example_problem();
    SolverConfig cfg;
    cfg.n_starts = 40;
    const auto first = search_to_json(multistart_search(p, cfg)).dump();
    const auto second = search_to_json(multistart_search(p, cfg)).dump();
    CHECK(first == second);

    SolverConfig parallel = cfg;
    parallel.threads = 4;
    const auto threaded = search_to_json(multistart_search(p, parallel)).dump();
    CHECK(threaded == first);
}

TEST_CASE("shell classification") {
    const auto params = testing::example_params();  // r, L, R = 4, 5, 10
    CHECK(shell_of(0.0, params) == Shell::U1);
    CHECK(shell_of(4.5, params) == Shell::U2MinusU1);
    CHECK(shell_of(10.0, params) == Shell::Outside);  // strict boundary
    CHECK(shell_of(4.0, params) == Shell::U2MinusU1);
    CHECK(shell_of(7.0, params) == Shell::U3MinusU2);

    Rng rng(63);
    for (int trial = 0; trial < 200; ++trial) {
        const double norm = rng.uniform(0.0, 15.0);
        int matches = 0;
        const Shell s = shell_of(norm, params);
        if (norm < params.r) matches += (s == Shell::U1);
        else if (norm < params.L) matches += (s == Shell::U2MinusU1);
        else if (norm < params.R) matches += (s == Shell::U3MinusU2);
        else matches += (s == Shell::Outside);
        CHECK(matches == 1);  // exactly one shell
    }
}

TEST_CASE("sign report uses the sign tolerance") {
    const auto p = testing::example_problem();
    SolverConfig cfg;
    const GridFunction u(p.scale, {-1.0, 1e-12, 0.5, 0.0, -1e-12, 2.0});
    const auto rb = residual_bundle(p, u);
    const auto rec = make_solution_record(p, u, cfg, rb.max_abs());
    REQUIRE(rec.sign_report.size() == 6);
    CHECK(rec.sign_report[0] == Sign::Negative);
    CHECK(rec.sign_report[1] == Sign::Zero);
    CHECK(rec.sign_report[2] == Sign::Positive);
    CHECK(rec.sign_report[3] == Sign::Zero);
    CHECK(rec.sign_report[4] == Sign::Zero);
    CHECK(rec.sign_report[5] == Sign::Positive);
    CHECK_FALSE(rec.nonnegative);

    const auto nonneg = make_solution_record(
        p, GridFunction(p.scale, {0.0, 1e-12, 0.5, 0.0, 0.25, 2.0}), cfg,
        residual_bundle(p, GridFunction(p.scale, {0.0, 1e-12, 0.5, 0.0, 0.25, 2.0})).max_abs());
    CHECK(nonneg.nonnegative);
}

TEST_CASE("solver configuration guards") {
    SolverConfig cfg;
    cfg.tol_residual = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.n_starts = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.backtrack_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    const auto p = testing::example_problem();
    CHECK_THROWS_AS(newton_solve(p, GridFunction(p.scale, {0.0, 0.0, 0.0, 0.0, 0.0}, 1),
                                 SolverConfig{}),
                    std::invalid_argument);
}
