#include "ddp/steady.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ddp {

SteadyCoefficients steady_coefficients(const ScalarField& psi, double alpha,
                                       const ModelData& m) {
    if (!all_finite(psi))
        throw std::invalid_argument("steady_coefficients: non-finite psi");
    const Grid& g = psi.grid();
    auto [mu_n, mu_p] = eval_equilibria(m, g);
    ScalarField wn(g), wp(g);
    for (std::size_t idx = 0; idx < wn.size(); ++idx) {
        wn[idx] = std::exp(-psi[idx]) * mu_n[idx];
        wp[idx] = std::exp(psi[idx]) * mu_p[idx];
    }
    return steady_coefficients_from(integrate(wn), integrate(wp), alpha);
}

SteadyCoefficients steady_coefficients_from(double i_n, double j_p, double alpha) {
    if (!(i_n > 0.0) || !(j_p > 0.0) || !std::isfinite(i_n) || !std::isfinite(j_p)) {
        std::ostringstream msg;
        msg << "steady_coefficients: degenerate integrals I = " << i_n << ", J = " << j_p
            << " (psi out of range for this box)";
        throw std::runtime_error(msg.str());
    }
    SteadyCoefficients c;
    c.i_n = i_n;
    c.j_p = j_p;
    const double root = std::sqrt(alpha * alpha + 4.0 * i_n * j_p);
    // The small combination root -/+ alpha is recovered from the product
    // identity (root - alpha)(root + alpha) = 4 I J, avoiding cancellation;
    // D_n D_p = 1 then holds to a few ulps for any admissible input.
    if (alpha >= 0.0) {
        c.d_n = (alpha + root) / (2.0 * i_n);
        c.d_p = 2.0 * i_n / (alpha + root);
    } else {
        c.d_p = (root - alpha) / (2.0 * j_p);
        c.d_n = 2.0 * j_p / (root - alpha);
    }
    return c;
}

SteadyState solve_steady(const ModelData& m, double alpha, const PoissonSolver& solver,
                         double theta, double tol, int max_iter, const ScalarField* psi0) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("solve_steady: damping theta must lie in (0,1]");
    const Grid& g = m.grid;
    if (!(solver.grid() == g))
        throw std::invalid_argument("solve_steady: solver grid differs from model grid");

    auto [mu_n, mu_p] = eval_equilibria(m, g);
    ScalarField psi = psi0 ? *psi0 : ScalarField(g, 0.0);
    std::vector<double> history;

    SteadyCoefficients coef;
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        coef = steady_coefficients(psi, alpha, m);
        ScalarField rho(g);
        for (std::size_t idx = 0; idx < rho.size(); ++idx)
            rho[idx] = coef.d_n * std::exp(-psi[idx]) * mu_n[idx] -
                       coef.d_p * std::exp(psi[idx]) * mu_p[idx] - m.doping[idx];
        ScalarField proposal = solver.solve(rho);
        double update = 0.0;
        for (std::size_t idx = 0; idx < psi.size(); ++idx) {
            double next = (1.0 - theta) * psi[idx] + theta * proposal[idx];
            update = std::max(update, std::abs(next - psi[idx]));
            psi[idx] = next;
        }
        history.push_back(update);
        if (update < tol) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "solve_steady: no convergence in " << max_iter << " iterations (last update "
            << (history.empty() ? 0.0 : history.back())
            << "); theta too large or box too small";
        throw SteadyIterationError(msg.str(), std::move(history));
    }

    // Coefficients re-evaluated at the final psi so the charge constraint
    // holds exactly for the returned fields under the same quadrature.
    coef = steady_coefficients(psi, alpha, m);
    SteadyState out{ScalarField(g), ScalarField(g), psi, 1.0, 1.0, alpha, 0.0, 0.0, 0, {}};
    for (std::size_t idx = 0; idx < out.n_inf.size(); ++idx) {
        out.n_inf[idx] = coef.d_n * std::exp(-psi[idx]) * mu_n[idx];
        out.p_inf[idx] = coef.d_p * std::exp(psi[idx]) * mu_p[idx];
    }
    out.d_n = coef.d_n;
    out.d_p = coef.d_p;
    out.alpha = alpha;
    out.iterations = it;
    out.update_history = std::move(history);

    SteadyResidual res = steady_residual(out, m, solver);
    out.residual_poisson = res.poisson;
    out.residual_charge = res.charge;
    return out;
}

SteadyResidual steady_residual(const SteadyState& s, const ModelData& m,
                               const PoissonSolver& solver) {
    const Grid& g = s.psi_inf.grid();
    SteadyResidual res;

    ScalarField lap = interior_laplacian(s.psi_inf);
    const double eps2 = solver.epsilon() * solver.epsilon();
    const int n = g.cells_per_axis();
    const int k0 = g.dim() == 3 ? 1 : 0;
    const int k1 = g.dim() == 3 ? n - 1 : 1;
    for (int k = k0; k < k1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                double rhs = s.n_inf.at(i, j, k) - s.p_inf.at(i, j, k) - m.doping.at(i, j, k);
                res.poisson = std::max(res.poisson,
                                       std::abs(-eps2 * lap.at(i, j, k) - rhs));
            }

    res.charge = std::abs(integrate(s.n_inf) - integrate(s.p_inf) - s.alpha);

    auto [mu_n, mu_p] = eval_equilibria(m, g);
    for (std::size_t idx = 0; idx < mu_n.size(); ++idx)
        res.mass_action = std::max(
            res.mass_action, std::abs(s.n_inf[idx] * s.p_inf[idx] - mu_n[idx] * mu_p[idx]));
    return res;
}

} // namespace ddp
