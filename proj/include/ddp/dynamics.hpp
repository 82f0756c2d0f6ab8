#ifndef DDP_DYNAMICS_HPP
#define DDP_DYNAMICS_HPP

/// @file dynamics.hpp
/// @brief Explicit positivity-preserving finite-volume stepper for the
///        coupled carrier system: Scharfetter-Gummel (or central/upwind)
///        drift-diffusion fluxes, Poisson re-solve each step, and one shared
///        reaction field subtracted from both species.

#include "ddp/grid.hpp"
#include "ddp/model.hpp"
#include "ddp/poisson.hpp"

namespace ddp {

/// The triple (n, p, psi) at a given time. psi is kept consistent with the
/// Poisson solve of n - p - D after every step.
struct CarrierState {
    double t = 0.0;
    int step_count = 0;
    ScalarField n, p, psi;

    CarrierState(ScalarField n_, ScalarField p_, ScalarField psi_)
        : n(std::move(n_)), p(std::move(p_)), psi(std::move(psi_)) {}
};

struct StepScheme {
    enum class Flux { ScharfetterGummel, CentralUpwind };
    enum class DtPolicy { Fixed, AutoPositivity };

    Flux flux = Flux::ScharfetterGummel;
    DtPolicy dt_policy = DtPolicy::AutoPositivity;
    double fixed_dt = 0.0;
    double safety = 0.9; // in (0,1]
};

/// Cellwise model data cached once per run: potentials and equilibria on the
/// grid. Building it per step would repeat the same exponentials.
struct ModelFields {
    ScalarField v_n, v_p;
    ScalarField mu_n, mu_p;
    ScalarField mu_prod; // mu_n * mu_p
};

ModelFields make_model_fields(const ModelData& m);

/// Bernoulli function z / (e^z - 1) with the series branch at |z| < 1e-5.
double bernoulli(double z);

/// Largest dt with dt * lambda_out <= safety for every cell and species,
/// where lambda_out sums the outgoing flux coefficients and the reaction
/// loss rate. safety is taken from the scheme for AutoPositivity and 1 for
/// Fixed.
double positivity_dt(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                     const ModelFields& mf);
double positivity_dt(const CarrierState& s, const ModelData& m, const StepScheme& scheme);

/// One explicit step: flux divergence minus the shared regularized reaction,
/// then a fresh Poisson solve. Zero normal flux across the box faces.
/// Throws when a fixed dt violates the positivity criterion.
CarrierState step(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                  const PoissonSolver& solver, const ModelFields& mf);
CarrierState step(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                  const PoissonSolver& solver);

/// Convenience: state with psi solved from the given densities.
CarrierState make_state(ScalarField n, ScalarField p, const ModelData& m,
                        const PoissonSolver& solver, double t = 0.0);

} // namespace ddp

#endif
