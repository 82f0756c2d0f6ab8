/// @file ddpsim.cpp
/// @brief Command-line front end: simulate, steady, validate and sweep-sigma
///        subcommands over a JSON config. Exit codes: 0 success, 1 hypothesis
///        validation failure, 2 runtime error.

#include "ddp/driver.hpp"
#include "ddp/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct Options {
    std::string config_path;
    bool force = false;
    bool quiet = false;
    std::vector<double> sigmas{0.5, 0.1, 0.02};
};

int cmd_validate(const Options& opt) {
    ddp::SimConfig cfg = ddp::parse_config(slurp(opt.config_path));
    ddp::ModelData m = ddp::build_model(cfg);
    ddp::ValidationReport rep = ddp::validate_hypotheses(m, m.grid);
    if (!opt.quiet) rep.print(std::cout);
    return rep.all_pass() ? 0 : 1;
}

// Returns false when hypothesis validation fails and force is not set.
bool validation_gate(const ddp::SimConfig& cfg, const Options& opt) {
    ddp::ModelData m = ddp::build_model(cfg);
    ddp::ValidationReport rep = ddp::validate_hypotheses(m, m.grid);
    if (rep.all_pass() || opt.force) return true;
    rep.print(std::cerr);
    return false;
}

int cmd_simulate(const Options& opt) {
    ddp::SimConfig cfg = ddp::parse_config(slurp(opt.config_path));
    if (!validation_gate(cfg, opt)) return 1;
    ddp::Trajectory traj = ddp::run_simulation(cfg, true);

    if (!cfg.outputs.csv_path.empty()) ddp::emit_timeseries(traj.reports, cfg.outputs.csv_path);
    if (!cfg.outputs.checkpoint_path.empty()) {
        const ddp::CheckpointMeta meta{cfg.epsilon, traj.steady.alpha};
        if (cfg.outputs.checkpoint_every > 0) {
            // intermediate checkpoints carry the sample index in the name
            for (std::size_t idx = 0; idx < traj.snapshots.size();
                 idx += static_cast<std::size_t>(cfg.outputs.checkpoint_every))
                ddp::checkpoint_save(traj.snapshots[idx], meta,
                                     cfg.outputs.checkpoint_path + "." + std::to_string(idx));
        }
        ddp::checkpoint_save(traj.snapshots.back(), meta, cfg.outputs.checkpoint_path);
    }
    if (!opt.quiet) {
        const ddp::EntropyReport& last = traj.reports.back();
        std::cout << "samples " << traj.reports.size() << ", t_final " << last.t
                  << ", entropy " << last.entropy << ", l1_dist_n " << last.l1_dist_n
                  << (traj.converged ? " (converged)" : "") << "\n";
    }
    return 0;
}

int cmd_steady(const Options& opt) {
    ddp::SimConfig cfg = ddp::parse_config(slurp(opt.config_path));
    if (!validation_gate(cfg, opt)) return 1;
    ddp::ModelData m = ddp::build_model(cfg);
    ddp::PoissonSolver solver(m.grid, cfg.epsilon);
    ddp::SteadyState eq = ddp::solve_steady(m, cfg.steady.alpha, solver, cfg.steady.theta,
                                            cfg.steady.tol, cfg.steady.max_iter);
    ddp::SteadyResidual res = ddp::steady_residual(eq, m, solver);
    if (!opt.quiet) {
        std::cout << "iterations " << eq.iterations << "\n"
                  << "D_n " << eq.d_n << ", D_p " << eq.d_p << ", D_n*D_p " << eq.d_n * eq.d_p
                  << "\n"
                  << "residual poisson " << res.poisson << "\n"
                  << "residual charge " << res.charge << "\n"
                  << "residual mass-action " << res.mass_action << "\n";
    }
    if (!cfg.outputs.checkpoint_path.empty()) {
        ddp::CarrierState s(std::move(eq.n_inf), std::move(eq.p_inf), std::move(eq.psi_inf));
        ddp::checkpoint_save(s, {cfg.epsilon, eq.alpha}, cfg.outputs.checkpoint_path);
    }
    return 0;
}

int cmd_sweep(const Options& opt) {
    ddp::SimConfig cfg = ddp::parse_config(slurp(opt.config_path));
    if (!validation_gate(cfg, opt)) return 1;
    auto points = ddp::sweep_sigma(cfg, opt.sigmas, true);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!cfg.outputs.csv_path.empty()) {
        file.open(cfg.outputs.csv_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + cfg.outputs.csv_path);
        os = &file;
    }
    (*os) << "sigma,l1_distance\n";
    char buf[96];
    for (const auto& pt : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", pt.sigma, pt.l1_distance);
        (*os) << buf;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bipolar drift-diffusion-Poisson simulator"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool with_sigmas = false) {
        sub->add_option("--config", opt.config_path, "path to the JSON config")->required();
        sub->add_flag("--force", opt.force, "run even when hypothesis validation fails");
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
        if (with_sigmas)
            sub->add_option("--sigmas", opt.sigmas,
                            "regularization values to sweep (sigma = 0 run is implicit)");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run the time-dependent system");
    CLI::App* steady = app.add_subcommand("steady", "solve the stationary system only");
    CLI::App* validate = app.add_subcommand("validate", "check hypotheses and report");
    CLI::App* sweep = app.add_subcommand("sweep-sigma", "regularization consistency sweep");
    add_common(simulate);
    add_common(steady);
    add_common(validate);
    add_common(sweep, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(opt);
        if (steady->parsed()) return cmd_steady(opt);
        if (validate->parsed()) return cmd_validate(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
