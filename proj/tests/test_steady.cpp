#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddp/steady.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace ddp;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

PotentialSpec quadratic(double curvature = 1.0) {
    PotentialSpec p;
    p.curvature = curvature;
    return p;
}

ScalarField two_bump_doping(const Grid& g, double a1, double a2) {
    ScalarField d(g);
    const int n = g.cells_per_axis();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                auto x = g.center(i, j, k);
                double q1 = (x[0] - 1.5) * (x[0] - 1.5) + x[1] * x[1] + x[2] * x[2];
                double q2 = (x[0] + 1.5) * (x[0] + 1.5) + x[1] * x[1] + x[2] * x[2];
                d.at(i, j, k) = a1 * std::exp(-q1) + a2 * std::exp(-q2);
            }
    return d;
}

ModelData symmetric_model(const Grid& g) {
    return ModelData::make(g, quadratic(), quadratic(), ScalarField(g, 0.0),
                           RecombinationModel::band_to_band(1.0));
}

ModelData asymmetric_model(const Grid& g) {
    return ModelData::make(g, quadratic(), quadratic(), two_bump_doping(g, 0.8, -0.3),
                           RecombinationModel::band_to_band(1.0));
}

} // namespace

TEST_CASE("coefficient formulas: closed-form cases") {
    // alpha = 0, I = J: D_n = D_p = 1
    auto c0 = steady_coefficients_from(0.7, 0.7, 0.0);
    CHECK(c0.d_n == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c0.d_p == doctest::Approx(1.0).epsilon(1e-15));

    // alpha = 3, I = J = 1: D_n = (3+sqrt13)/2, D_p = (sqrt13-3)/2
    auto c1 = steady_coefficients_from(1.0, 1.0, 3.0);
    CHECK(c1.d_n == doctest::Approx((3.0 + std::sqrt(13.0)) / 2.0).epsilon(1e-15));
    CHECK(c1.d_p == doctest::Approx((std::sqrt(13.0) - 3.0) / 2.0).epsilon(1e-15));
    CHECK(c1.d_n == doctest::Approx(3.302776).epsilon(1e-6));
    CHECK(c1.d_p == doctest::Approx(0.302776).epsilon(1e-5));
    CHECK(c1.d_n * c1.d_p == doctest::Approx(1.0).epsilon(1e-14));

    // I = 2, J = 1, alpha = 0: D_n = sqrt2/2, D_p = sqrt2
    auto c2 = steady_coefficients_from(2.0, 1.0, 0.0);
    CHECK(c2.d_n == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(c2.d_p == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(steady_coefficients_from(0.0, 1.0, 0.0), std::runtime_error);
}

TEST_CASE("coefficient identities over random inputs (property)") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> log_ij(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> alpha_dist(-10.0, 10.0);
    for (int rep = 0; rep < 2000; ++rep) {
        double i_n = std::exp(log_ij(rng));
        double j_p = std::exp(log_ij(rng));
        double alpha = alpha_dist(rng);
        auto c = steady_coefficients_from(i_n, j_p, alpha);
        CHECK(std::abs(c.d_n * c.d_p - 1.0) <= 1e-14);
        // charge identity, relative to the problem scale sqrt(alpha^2 + 4IJ)
        double scale = std::sqrt(alpha * alpha + 4.0 * i_n * j_p);
        CHECK(std::abs(c.d_n * i_n - c.d_p * j_p - alpha) <= 1e-12 * scale);
    }
}

TEST_CASE("solve_steady: symmetric problem lands on the equilibria") {
    Grid g(3, 8.0, 16);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    SteadyState eq = solve_steady(m, 0.0, solver);
    CHECK(lr_norm(eq.psi_inf, kInf) <= 1e-9);
    CHECK(eq.d_n == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eq.d_p == doctest::Approx(1.0).epsilon(1e-10));
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    for (std::size_t idx = 0; idx < mu_n.size(); ++idx) {
        CHECK(eq.n_inf[idx] == doctest::Approx(mu_n[idx]).epsilon(1e-9));
        CHECK(eq.p_inf[idx] == doctest::Approx(mu_p[idx]).epsilon(1e-9));
    }
}

TEST_CASE("solve_steady: converged output satisfies the stationary identities") {
    Grid g(3, 8.0, 16);
    ModelData m = asymmetric_model(g);
    PoissonSolver solver(g, 1.0);
    const double alpha = 0.3;
    SteadyState eq = solve_steady(m, alpha, solver, 0.5, 1e-12, 500);

    auto [mu_n, mu_p] = eval_equilibria(m, g);
    for (std::size_t idx = 0; idx < mu_n.size(); ++idx) {
        double lhs = eq.n_inf[idx] * eq.p_inf[idx];
        double rhs = mu_n[idx] * mu_p[idx];
        CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
        CHECK(eq.n_inf[idx] > 0.0);
        CHECK(eq.p_inf[idx] > 0.0);
    }
    CHECK(std::abs(integrate(eq.n_inf) - integrate(eq.p_inf) - alpha) <= 1e-8);
    CHECK(eq.d_n * eq.d_p == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(eq.alpha == alpha);
    CHECK(eq.iterations <= 200);
}

TEST_CASE("solve_steady: initialization independence (empirical uniqueness)") {
    Grid g(3, 8.0, 16);
    ModelData m = asymmetric_model(g);
    PoissonSolver solver(g, 1.0);
    const double tol = 1e-11;
    SteadyState a = solve_steady(m, 0.3, solver, 0.5, tol, 500);

    // second start: the Poisson potential of a rough guess
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    ScalarField rho(g);
    for (std::size_t idx = 0; idx < rho.size(); ++idx)
        rho[idx] = 1.3 * mu_n[idx] - 0.9 * mu_p[idx] - m.doping[idx];
    ScalarField psi0 = solver.solve(rho);
    SteadyState b = solve_steady(m, 0.3, solver, 0.5, tol, 500, &psi0);

    double diff = 0.0;
    for (std::size_t idx = 0; idx < a.psi_inf.size(); ++idx)
        diff = std::max(diff, std::abs(a.psi_inf[idx] - b.psi_inf[idx]));
    CHECK(diff <= 10.0 * tol);
}

TEST_CASE("solve_steady: monotone updates after the opening iterations") {
    Grid g(3, 8.0, 16);
    ModelData m = asymmetric_model(g);
    PoissonSolver solver(g, 1.0);
    SteadyState eq = solve_steady(m, 0.3, solver, 0.5, 1e-12, 500);
    REQUIRE(eq.update_history.size() >= 5);
    for (std::size_t k = 3; k + 1 < eq.update_history.size(); ++k)
        CHECK(eq.update_history[k + 1] <= eq.update_history[k] * (1.0 + 1e-12));
}

TEST_CASE("solve_steady: iteration budget exhaustion carries the history") {
    Grid g(3, 8.0, 16);
    ModelData m = asymmetric_model(g);
    PoissonSolver solver(g, 1.0);
    try {
        solve_steady(m, 0.3, solver, 0.5, 1e-14, 3);
        FAIL("expected iteration error");
    } catch (const SteadyIterationError& e) {
        CHECK(e.history().size() == 3);
    }
}

TEST_CASE("steady_residual: exact solution, stencil response, mass-action scaling") {
    Grid g(3, 8.0, 16);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    SteadyState eq = solve_steady(m, 0.0, solver, 0.5, 1e-12, 500);

    SteadyResidual base = steady_residual(eq, m, solver);
    CHECK(base.charge <= 1e-12);
    CHECK(base.mass_action <= 1e-12);

    // +0.1 at one interior cell raises the poisson residual by about
    // 0.1 * 2 dim eps^2 / h^2 there (diagonal of the 7-point stencil)
    SteadyState bumped = eq;
    bumped.psi_inf.at(8, 8, 8) += 0.1;
    SteadyResidual r = steady_residual(bumped, m, solver);
    const double h = g.spacing();
    const double expected_jump = 0.1 * 6.0 / (h * h);
    CHECK(r.poisson == doctest::Approx(base.poisson + expected_jump).epsilon(0.01));
    CHECK(r.mass_action == base.mass_action); // n, p untouched

    // doubling n makes the mass-action residual max|2 n p - mu mu|
    SteadyState doubled = eq;
    for (std::size_t idx = 0; idx < doubled.n_inf.size(); ++idx) doubled.n_inf[idx] *= 2.0;
    SteadyResidual r2 = steady_residual(doubled, m, solver);
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    double expect = 0.0;
    for (std::size_t idx = 0; idx < mu_n.size(); ++idx)
        expect = std::max(expect, std::abs(2.0 * eq.n_inf[idx] * eq.p_inf[idx] -
                                           mu_n[idx] * mu_p[idx]));
    CHECK(r2.mass_action == doctest::Approx(expect).epsilon(1e-12));
}
