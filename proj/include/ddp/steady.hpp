#ifndef DDP_STEADY_HPP
#define DDP_STEADY_HPP

/// @file steady.hpp
/// @brief Stationary system: Boltzmann-distributed densities with coefficients
///        D_n, D_p fixed by the charge constraint, closed by the free-space
///        Poisson solve. Solved as a damped fixed-point iteration on psi.

#include "ddp/grid.hpp"
#include "ddp/model.hpp"
#include "ddp/poisson.hpp"

#include <stdexcept>
#include <vector>

namespace ddp {

struct SteadyState {
    ScalarField n_inf, p_inf, psi_inf;
    double d_n = 1.0, d_p = 1.0;
    double alpha = 0.0;
    double residual_poisson = 0.0;
    double residual_charge = 0.0;
    int iterations = 0;
    std::vector<double> update_history; // sup-norm of psi updates per iteration
};

/// I = integral e^{-psi - V_n}, J = integral e^{psi - V_p} and the
/// coefficients D_n = (alpha + sqrt(alpha^2 + 4IJ)) / (2I),
/// D_p = (sqrt(alpha^2 + 4IJ) - alpha) / (2J), which satisfy D_n D_p = 1 and
/// D_n I - D_p J = alpha identically.
struct SteadyCoefficients {
    double i_n = 0.0; // integral e^{-psi - V_n}
    double j_p = 0.0; // integral e^{ psi - V_p}
    double d_n = 1.0, d_p = 1.0;
};

SteadyCoefficients steady_coefficients(const ScalarField& psi, double alpha, const ModelData& m);

/// The coefficient formulas alone, for given integrals I, J > 0.
SteadyCoefficients steady_coefficients_from(double i_n, double j_p, double alpha);

/// Thrown when the damped iteration fails to converge; carries the
/// per-iteration update history for diagnosis.
class SteadyIterationError : public std::runtime_error {
public:
    SteadyIterationError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Damped fixed point: psi^{k+1} = (1-theta) psi^k + theta * solve(rho(psi^k))
/// with rho = D_n e^{-psi} mu_n - D_p e^{psi} mu_p - D, starting from psi0
/// (zero field when null). Stops when the sup-norm update drops below tol.
SteadyState solve_steady(const ModelData& m, double alpha, const PoissonSolver& solver,
                         double theta = 0.5, double tol = 1e-10, int max_iter = 500,
                         const ScalarField* psi0 = nullptr);

struct SteadyResidual {
    double poisson = 0.0;     // sup |-eps^2 Lap_h(psi) - (n - p - D)| on interior cells
    double charge = 0.0;      // |integral (n - p) - alpha|
    double mass_action = 0.0; // sup |n p - mu_n mu_p|
};

/// Re-checks the stationary system independently of the solve path.
SteadyResidual steady_residual(const SteadyState& s, const ModelData& m,
                               const PoissonSolver& solver);

} // namespace ddp

#endif
