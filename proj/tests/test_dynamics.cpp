#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddp/driver.hpp"
#include "ddp/dynamics.hpp"

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

ModelData symmetric_model(const Grid& g,
                          RecombinationModel rec = RecombinationModel::band_to_band(1.0)) {
    return ModelData::make(g, quadratic(), quadratic(), ScalarField(g, 0.0), std::move(rec));
}

ModelData flat_model(const Grid& g) {
    // curvature 0: after normalization V is the constant ln(vol), so the
    // drift vanishes and the step is pure diffusion plus reaction
    PotentialSpec flat;
    flat.curvature = 0.0;
    return ModelData::make(g, flat, flat, ScalarField(g, 0.0),
                           RecombinationModel::band_to_band(1.0));
}

ScalarField random_density(const Grid& g, std::mt19937& rng, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(0.0, hi);
    ScalarField f(g);
    for (std::size_t idx = 0; idx < f.size(); ++idx) f[idx] = dist(rng);
    return f;
}

double min_value(const ScalarField& f) {
    double m = f[0];
    for (double v : f.values()) m = std::min(m, v);
    return m;
}

double charge(const CarrierState& s) { return integrate(s.n) - integrate(s.p); }

} // namespace

TEST_CASE("bernoulli function: value, reflection identity and series branch") {
    CHECK(bernoulli(0.0) == 1.0);
    for (double z : {-30.0, -2.0, -1e-4, 1e-4, 0.5, 5.0, 200.0, 800.0}) {
        CHECK(bernoulli(-z) == doctest::Approx(bernoulli(z) + z).epsilon(1e-12));
        CHECK(bernoulli(z) >= 0.0);
    }
    // series and direct formula agree around the switch point
    for (double z : {9e-6, 1.1e-5, -9e-6, -1.1e-5})
        CHECK(bernoulli(z) == doctest::Approx(z / std::expm1(z)).epsilon(1e-12));
}

TEST_CASE("symmetric Gibbs equilibrium is a fixed point of the SG step") {
    Grid g(3, 8.0, 16);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    CarrierState s = make_state(mu_n, mu_p, m, solver);
    // psi = solve(0) = 0 for the symmetric start
    CHECK(lr_norm(s.psi, kInf) <= 1e-14);

    StepScheme scheme;
    CarrierState next = step(s, m, scheme, solver);
    double nmax = lr_norm(s.n, kInf);
    double drift = 0.0;
    for (std::size_t idx = 0; idx < s.n.size(); ++idx)
        drift = std::max(drift, std::abs(next.n[idx] - s.n[idx]));
    CHECK(drift <= 1e-12 * nmax);
}

TEST_CASE("charge difference is conserved by every flux/reaction variant") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(51);
    for (auto rec :
         {RecombinationModel::band_to_band(1.0), RecombinationModel::srh(1.0, 1.0, 1.0),
          RecombinationModel::auger(0.5, 0.8), RecombinationModel::band_to_band(1.0, 0.5)}) {
        ModelData m = symmetric_model(g, rec);
        PoissonSolver solver(g, 1.0);
        ScalarField n0 = random_density(g, rng, 1.0);
        ScalarField p0 = random_density(g, rng, 0.7); // deliberately asymmetric
        CarrierState s = make_state(n0, p0, m, solver);
        const double q0 = charge(s);
        const ModelFields mf = make_model_fields(m);
        StepScheme scheme;
        for (int it = 0; it < 60; ++it) s = step(s, m, scheme, solver, mf);
        CHECK(std::abs(charge(s) - q0) <= 1e-13 * std::abs(q0));
    }
}

TEST_CASE("central/upwind flux also conserves charge and positivity") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(52);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    CarrierState s = make_state(random_density(g, rng), random_density(g, rng, 0.6), m, solver);
    const double q0 = charge(s);
    StepScheme scheme;
    scheme.flux = StepScheme::Flux::CentralUpwind;
    const ModelFields mf = make_model_fields(m);
    for (int it = 0; it < 60; ++it) {
        s = step(s, m, scheme, solver, mf);
        CHECK(min_value(s.n) >= 0.0);
        CHECK(min_value(s.p) >= 0.0);
    }
    CHECK(std::abs(charge(s) - q0) <= 1e-13 * std::abs(q0));
}

TEST_CASE("positivity holds for arbitrary nonnegative data with auto dt") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(53);
    ModelData m = symmetric_model(g, RecombinationModel::auger(2.0, 3.0));
    PoissonSolver solver(g, 1.0);
    CarrierState s = make_state(random_density(g, rng, 5.0), random_density(g, rng, 5.0), m,
                                solver);
    StepScheme scheme;
    const ModelFields mf = make_model_fields(m);
    for (int it = 0; it < 100; ++it) {
        s = step(s, m, scheme, solver, mf);
        CHECK(min_value(s.n) >= 0.0);
        CHECK(min_value(s.p) >= 0.0);
    }
}

TEST_CASE("positivity_dt: pure-diffusion closed form, h scaling, drift monotonicity") {
    // flat potentials and zero fields: every SG coefficient is B(0) = 1,
    // so lambda = 2 dim / h^2 and dt = safety h^2 / (2 dim)
    for (int n : {8, 16}) {
        Grid g(3, 4.0, n);
        ModelData m = flat_model(g);
        CarrierState s{ScalarField(g, 0.0), ScalarField(g, 0.0), ScalarField(g, 0.0)};
        StepScheme scheme;
        scheme.safety = 0.9;
        const double h = g.spacing();
        const double expected = 0.9 * h * h / (2.0 * 3.0);
        CHECK(positivity_dt(s, m, scheme) == doctest::Approx(expected).epsilon(1e-13));
    }
    // doubling h (same N, doubled box) quadruples dt
    {
        Grid g1(3, 4.0, 8), g2(3, 8.0, 8);
        CarrierState s1{ScalarField(g1, 0.0), ScalarField(g1, 0.0), ScalarField(g1, 0.0)};
        CarrierState s2{ScalarField(g2, 0.0), ScalarField(g2, 0.0), ScalarField(g2, 0.0)};
        StepScheme scheme;
        double dt1 = positivity_dt(s1, flat_model(g1), scheme);
        double dt2 = positivity_dt(s2, flat_model(g2), scheme);
        CHECK(dt2 == doctest::Approx(4.0 * dt1).epsilon(1e-13));
    }
    // strong drift strictly decreases dt vs the zero-drift case
    {
        Grid g(3, 4.0, 8);
        CarrierState s{ScalarField(g, 0.0), ScalarField(g, 0.0), ScalarField(g, 0.0)};
        StepScheme scheme;
        double flat_dt = positivity_dt(s, flat_model(g), scheme);
        ModelData steep = ModelData::make(g, quadratic(6.0), quadratic(6.0),
                                          ScalarField(g, 0.0),
                                          RecombinationModel::band_to_band(1.0));
        double drift_dt = positivity_dt(s, steep, scheme);
        CHECK(drift_dt < flat_dt);
    }
    // 2D variant of the closed form
    {
        Grid g(2, 4.0, 8);
        ModelData m = flat_model(g);
        CarrierState s{ScalarField(g, 0.0), ScalarField(g, 0.0), ScalarField(g, 0.0)};
        StepScheme scheme;
        const double h = g.spacing();
        CHECK(positivity_dt(s, m, scheme) ==
              doctest::Approx(0.9 * h * h / 4.0).epsilon(1e-13));
    }
}

TEST_CASE("fixed dt beyond the positivity bound reports cell and admissible dt") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(54);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    CarrierState s = make_state(random_density(g, rng), random_density(g, rng), m, solver);
    StepScheme scheme;
    scheme.dt_policy = StepScheme::DtPolicy::Fixed;
    scheme.fixed_dt = 100.0;
    try {
        step(s, m, scheme, solver);
        FAIL("expected positivity violation");
    } catch (const std::runtime_error& e) {
        std::string what = e.what();
        CHECK(what.find("maximal admissible dt") != std::string::npos);
        CHECK(what.find("cell") != std::string::npos);
    }
}

TEST_CASE("mass growth per step obeys the integrated reaction bound") {
    // mass(t+dt) - mass(t) <= dt * 2 c2 integral mu_n mu_p (1 + n + p)
    Grid g(3, 6.0, 8);
    std::mt19937 rng(55);
    ModelData m = symmetric_model(g, RecombinationModel::band_to_band(2.0, 0.25));
    PoissonSolver solver(g, 1.0);
    const ModelFields mf = make_model_fields(m);
    CarrierState s = make_state(random_density(g, rng, 2.0), random_density(g, rng, 2.0), m,
                                solver);
    StepScheme scheme;
    const double c2 = m.rec.growth_c2();
    for (int it = 0; it < 40; ++it) {
        double mass_before = integrate(s.n) + integrate(s.p);
        ScalarField bound(g);
        for (std::size_t idx = 0; idx < bound.size(); ++idx)
            bound[idx] = mf.mu_prod[idx] * (1.0 + s.n[idx] + s.p[idx]);
        double rhs = 2.0 * c2 * integrate(bound);
        CarrierState next = step(s, m, scheme, solver, mf);
        double dt = next.t - s.t;
        double increment = integrate(next.n) + integrate(next.p) - mass_before;
        CHECK(increment <= dt * rhs + 1e-10);
        s = std::move(next);
    }
}

TEST_CASE("mirror-symmetric data stays mirror-symmetric") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(56);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    const int n = g.cells_per_axis();
    ScalarField n0(g), p0(g);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n / 2; ++i) {
                double vn = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                double vp = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                n0.at(i, j, k) = n0.at(n - 1 - i, j, k) = vn;
                p0.at(i, j, k) = p0.at(n - 1 - i, j, k) = vp;
            }
    CarrierState s = make_state(n0, p0, m, solver);
    StepScheme scheme;
    const ModelFields mf = make_model_fields(m);
    for (int it = 0; it < 30; ++it) s = step(s, m, scheme, solver, mf);
    double scale = lr_norm(s.n, kInf);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n / 2; ++i) {
                CHECK(std::abs(s.n.at(i, j, k) - s.n.at(n - 1 - i, j, k)) <= 1e-11 * scale);
                CHECK(std::abs(s.p.at(i, j, k) - s.p.at(n - 1 - i, j, k)) <= 1e-11 * scale);
            }
}

TEST_CASE("transform invariant holds on live states") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(57);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    CarrierState s = make_state(random_density(g, rng), random_density(g, rng), m, solver);
    StepScheme scheme;
    const ModelFields mf = make_model_fields(m);
    for (int it = 0; it < 5; ++it) {
        s = step(s, m, scheme, solver, mf);
        TransformedVariables tv = transform_variables(s.n, s.p, m);
        CHECK(min_value(tv.a_n) >= m.lap_bound / 2.0 - 1e-13);
        CHECK(min_value(tv.a_p) >= m.lap_bound / 2.0 - 1e-13);
    }
}

TEST_CASE("run: t_end = 0 yields exactly the initial snapshot") {
    Grid g(3, 6.0, 8);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    CarrierState s0 = make_state(mu_n, mu_p, m, solver);
    Trajectory traj = run(m, StepScheme{}, solver, s0, 0.0, 0.1, 0.0);
    CHECK(traj.snapshots.size() == 1);
    CHECK(traj.reports.size() == 1);
    CHECK(traj.reports[0].t == 0.0);
}

TEST_CASE("run: equilibrium start terminates immediately on the L1 criterion") {
    Grid g(3, 6.0, 8);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    CarrierState s0 = make_state(mu_n, mu_p, m, solver);
    Trajectory traj = run(m, StepScheme{}, solver, s0, 10.0, 0.1, 1e-6);
    CHECK(traj.converged);
    CHECK(traj.snapshots.size() == 1);
}

TEST_CASE("sigma-to-zero consistency on a small problem") {
    Grid g(3, 6.0, 8);
    SimConfig cfg;
    cfg.grid.dim = 3;
    cfg.grid.half_width = 6.0;
    cfg.grid.cells = 8;
    cfg.recombination.variant = "band_to_band";
    cfg.recombination.c = 1.0;
    cfg.initial.kind = "gaussian_perturbation";
    cfg.initial.amplitude = 0.8;
    cfg.initial.width = 2.0;
    cfg.stepping.t_end = 0.5;
    cfg.stepping.sample_interval = 0.5;
    auto points = sweep_sigma(cfg, {0.1, 0.01});
    REQUIRE(points.size() == 2);
    CHECK(points[0].l1_distance > points[1].l1_distance);
    CHECK(points[1].l1_distance > 0.0);
}

TEST_CASE("level_set_measure: bounds and exact monotonicity") {
    Grid g(3, 6.0, 8);
    std::mt19937 rng(58);
    ModelData m = symmetric_model(g);
    PoissonSolver solver(g, 1.0);
    ScalarField n0 = random_density(g, rng, 2.0), p0 = random_density(g, rng, 2.0);
    for (std::size_t idx = 0; idx < n0.size(); ++idx) {
        n0[idx] += 0.01; // strictly positive
        p0[idx] += 0.01;
    }
    CarrierState s0 = make_state(n0, p0, m, solver);
    Trajectory traj = run(m, StepScheme{}, solver, s0, 0.05, 0.01, 0.0);

    double top = 0.0;
    for (const auto& s : traj.snapshots)
        top = std::max({top, lr_norm(s.n, kInf), lr_norm(s.p, kInf)});
    CHECK(level_set_measure(traj, top) == 0.0);
    CHECK(level_set_measure(traj, top + 1.0) == 0.0);

    const double boxvol = std::pow(2.0 * g.half_width(), 3);
    CHECK(level_set_measure(traj, 0.0) == doctest::Approx(2.0 * boxvol).epsilon(1e-12));

    double prev = kInf;
    for (int step_k = 0; step_k <= 50; ++step_k) {
        double k = top * step_k / 50.0;
        double w = level_set_measure(traj, k);
        CHECK(w <= prev);
        prev = w;
    }
}
