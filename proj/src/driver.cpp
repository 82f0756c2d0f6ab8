#include "ddp/driver.hpp"

#include "ddp/io.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ddp {

namespace {

double l1_distance(const ScalarField& a, const ScalarField& b) {
    ScalarField diff(a.grid());
    for (std::size_t idx = 0; idx < diff.size(); ++idx) diff[idx] = a[idx] - b[idx];
    return lr_norm(diff, 1.0);
}

EntropyReport make_report(const CarrierState& s, const SteadyState& eq, const ModelData& m) {
    std::vector<CarrierState> one;
    one.push_back(s);
    return convergence_report(one, eq, m).front();
}

} // namespace

Trajectory run(const ModelData& m, const StepScheme& scheme, const PoissonSolver& solver,
               CarrierState initial, double t_end, double sample_interval, double stop_tol,
               const SimConfig::SteadyCfg& steady_cfg) {
    if (!(sample_interval > 0.0))
        throw std::invalid_argument("run: sample_interval must be > 0");
    if (t_end < 0.0) throw std::invalid_argument("run: t_end must be >= 0");

    const double alpha = integrate(initial.n) - integrate(initial.p);
    Trajectory traj{{},
                    {},
                    solve_steady(m, alpha, solver, steady_cfg.theta, steady_cfg.tol,
                                 steady_cfg.max_iter),
                    false};

    const ModelFields mf = make_model_fields(m);

    auto sample = [&](const CarrierState& s) {
        traj.snapshots.push_back(s);
        traj.reports.push_back(make_report(s, traj.steady, m));
    };
    auto distance = [&](const CarrierState& s) {
        return l1_distance(s.n, traj.steady.n_inf) + l1_distance(s.p, traj.steady.p_inf);
    };

    CarrierState state = std::move(initial);
    sample(state);
    if (stop_tol > 0.0 && distance(state) < stop_tol) {
        traj.converged = true;
        return traj;
    }

    int next_sample = 1;
    while (state.t < t_end) {
        double dt_wanted = t_end - state.t;
        StepScheme local = scheme;
        if (scheme.dt_policy == StepScheme::DtPolicy::AutoPositivity) {
            double dt = std::min(positivity_dt(state, m, scheme, mf), dt_wanted);
            local.dt_policy = StepScheme::DtPolicy::Fixed;
            local.fixed_dt = dt;
        } else {
            local.fixed_dt = std::min(scheme.fixed_dt, dt_wanted);
        }
        try {
            state = step(state, m, local, solver, mf);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "run: step " << state.step_count + 1 << " failed: " << e.what();
            throw std::runtime_error(msg.str());
        }
        if (!all_finite(state.n) || !all_finite(state.p) || !all_finite(state.psi)) {
            std::ostringstream msg;
            msg << "run: non-finite field at step " << state.step_count;
            throw std::runtime_error(msg.str());
        }

        bool at_end = state.t >= t_end;
        if (state.t >= next_sample * sample_interval - 1e-12 || at_end) {
            sample(state);
            next_sample = static_cast<int>(std::floor((state.t + 1e-12) / sample_interval)) + 1;
            if (stop_tol > 0.0 && distance(state) < stop_tol) {
                traj.converged = true;
                return traj;
            }
        }
    }
    return traj;
}

CarrierState build_initial_state(const SimConfig& cfg, const ModelData& m,
                                 const PoissonSolver& solver) {
    const Grid& g = m.grid;
    if (cfg.initial.kind == "custom_checkpoint") {
        Checkpoint ck = checkpoint_load(cfg.initial.checkpoint_path);
        if (ck.grid.dim() != g.dim()) {
            std::ostringstream msg;
            msg << "initial: checkpoint dimension " << ck.grid.dim()
                << " does not match the requested dim " << g.dim();
            throw std::runtime_error(msg.str());
        }
        if (!(ck.grid == g)) {
            std::ostringstream msg;
            msg << "initial: checkpoint grid (N=" << ck.grid.cells_per_axis()
                << ", L=" << ck.grid.half_width() << ") does not match the run grid (N="
                << g.cells_per_axis() << ", L=" << g.half_width() << ")";
            throw std::runtime_error(msg.str());
        }
        CarrierState s(std::move(ck.n), std::move(ck.p), std::move(ck.psi));
        s.t = 0.0;
        return s;
    }

    SteadyState eq = solve_steady(m, cfg.steady.alpha, solver, cfg.steady.theta, cfg.steady.tol,
                                  cfg.steady.max_iter);
    if (cfg.initial.kind == "equilibrium")
        return make_state(std::move(eq.n_inf), std::move(eq.p_inf), m, solver);

    // gaussian_perturbation: modulate the equilibrium and clip at 0
    ScalarField n(g), p(g);
    const int nc = g.cells_per_axis();
    const int nk = g.dim() == 3 ? nc : 1;
    const double a = cfg.initial.amplitude;
    const double w2 = cfg.initial.width * cfg.initial.width;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < nc; ++j)
            for (int i = 0; i < nc; ++i) {
                auto x = g.center(i, j, k);
                double q = 0.0;
                for (int d = 0; d < g.dim(); ++d) {
                    double dx = x[d] - cfg.initial.center[d];
                    q += dx * dx;
                }
                double factor = std::max(1.0 + a * std::exp(-q / w2), 0.0);
                std::size_t idx = g.index(i, j, k);
                n[idx] = eq.n_inf[idx] * factor;
                p[idx] = eq.p_inf[idx] * factor;
            }
    return make_state(std::move(n), std::move(p), m, solver);
}

Trajectory run_simulation(const SimConfig& cfg, bool force) {
    ModelData m = build_model(cfg);
    ValidationReport rep = validate_hypotheses(m, m.grid);
    if (!rep.all_pass() && !force) {
        std::ostringstream msg;
        msg << "run_simulation: hypothesis validation failed:\n";
        rep.print(msg);
        throw std::runtime_error(msg.str());
    }
    PoissonSolver solver(m.grid, cfg.epsilon);
    CarrierState initial = build_initial_state(cfg, m, solver);
    return run(m, build_scheme(cfg), solver, std::move(initial), cfg.stepping.t_end,
               cfg.stepping.sample_interval, cfg.stepping.stop_tol, cfg.steady);
}

double level_set_measure(const Trajectory& traj, double k) {
    if (k < 0.0) throw std::invalid_argument("level_set_measure: k must be >= 0");
    double sup = 0.0;
    for (const CarrierState& s : traj.snapshots) {
        const double vol = s.n.grid().cell_volume();
        std::size_t count_n = 0, count_p = 0;
        for (std::size_t idx = 0; idx < s.n.size(); ++idx) {
            if (s.n[idx] > k) ++count_n;
            if (s.p[idx] > k) ++count_p;
        }
        sup = std::max(sup, (static_cast<double>(count_n) + static_cast<double>(count_p)) * vol);
    }
    return sup;
}

std::vector<SweepPoint> sweep_sigma(const SimConfig& cfg, const std::vector<double>& sigmas,
                                    bool force) {
    for (double s : sigmas)
        if (!(s > 0.0))
            throw std::invalid_argument("sweep_sigma: sigma values must be > 0");

    auto final_density = [&](double sigma) {
        SimConfig c = cfg;
        c.recombination.sigma = sigma;
        Trajectory traj = run_simulation(c, force);
        return traj.snapshots.back().n;
    };

    ScalarField reference = final_density(0.0);
    std::vector<SweepPoint> points;
    points.reserve(sigmas.size());
    for (double s : sigmas) {
        ScalarField n_sigma = final_density(s);
        points.push_back({s, l1_distance(n_sigma, reference)});
    }
    return points;
}

} // namespace ddp
