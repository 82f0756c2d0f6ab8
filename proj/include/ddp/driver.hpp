#ifndef DDP_DRIVER_HPP
#define DDP_DRIVER_HPP

/// @file driver.hpp
/// @brief Time-loop orchestration: sampled trajectories with per-sample
///        entropy reports, termination on L1 distance to the steady state,
///        the level-set diagnostic and the sigma sweep.

#include "ddp/config.hpp"
#include "ddp/dynamics.hpp"
#include "ddp/entropy.hpp"
#include "ddp/steady.hpp"

#include <vector>

namespace ddp {

struct Trajectory {
    std::vector<CarrierState> snapshots;
    std::vector<EntropyReport> reports;
    SteadyState steady; // reference equilibrium (alpha from the initial data)
    bool converged = false;
};

/// Steps from `initial` until t_end, sampling every sample_interval (t = 0
/// included). Terminates early when |n - n_inf|_1 + |p - p_inf|_1 < stop_tol
/// (stop_tol = 0 disables). The reference steady state is solved with alpha
/// taken from the initial data.
Trajectory run(const ModelData& m, const StepScheme& scheme, const PoissonSolver& solver,
               CarrierState initial, double t_end, double sample_interval, double stop_tol,
               const SimConfig::SteadyCfg& steady_cfg = {});

/// Builds model, solver and initial data from the config, then runs.
/// Hypothesis validation must pass unless force is set.
Trajectory run_simulation(const SimConfig& cfg, bool force = false);

/// Initial data per config: equilibrium, Gaussian-modulated equilibrium
/// (clipped at 0) or a checkpoint (grid must match).
CarrierState build_initial_state(const SimConfig& cfg, const ModelData& m,
                                 const PoissonSolver& solver);

/// omega_T(k): sup over sampled times of the measure of {n > k} plus {p > k}.
double level_set_measure(const Trajectory& traj, double k);

struct SweepPoint {
    double sigma = 0.0;
    double l1_distance = 0.0; // |n_sigma(t_end) - n_0(t_end)|_1
};

/// Runs the config's problem from fixed initial data to t_end once with
/// sigma = 0 and once per requested sigma; reports the L1 distances.
std::vector<SweepPoint> sweep_sigma(const SimConfig& cfg, const std::vector<double>& sigmas,
                                    bool force = false);

} // namespace ddp

#endif
