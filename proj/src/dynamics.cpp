#include "ddp/dynamics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ddp {

ModelFields make_model_fields(const ModelData& m) {
    auto [mu_n, mu_p] = eval_equilibria(m, m.grid);
    ModelFields mf{m.v_n.evaluate(m.grid), m.v_p.evaluate(m.grid), std::move(mu_n),
                   std::move(mu_p), ScalarField(m.grid)};
    for (std::size_t idx = 0; idx < mf.mu_prod.size(); ++idx)
        mf.mu_prod[idx] = mf.mu_n[idx] * mf.mu_p[idx];
    return mf;
}

double bernoulli(double z) {
    if (std::abs(z) < 1e-5) return 1.0 - 0.5 * z + z * z / 12.0;
    if (z > 0.0) return z * std::exp(-z) / (-std::expm1(-z));
    return z / std::expm1(z);
}

namespace {

// Reaction split R~ = loss - gain with loss = F~ n~ p~ >= 0 and
// gain = F~ delta^2 mu_n mu_p >= 0. The loss is expressed as a rate per unit
// density so the update can be written in the nonnegative-by-construction
// form n (1 - dt lambda) + dt (inflow + gain).
struct ReactionSplit {
    double loss_rate_n; // multiplies n
    double loss_rate_p; // multiplies p
    double gain;        // shared nonnegative source
};

inline ReactionSplit reaction_split(const RecombinationModel& rec, double n, double p,
                                    double mu_prod) {
    const double s = rec.sigma;
    double nn = n, pp = p;
    if (s > 0.0) {
        nn = n / (1.0 + s * n);
        pp = p / (1.0 + s * p);
    }
    const double f = rec.f(nn, pp);
    const double gain = f * rec.delta * rec.delta * mu_prod;
    // loss = f nn pp = (f pp / (1 + s n)) * n, and symmetrically for p
    const double rate_n = n > 0.0 ? f * pp * (nn / n) : 0.0;
    const double rate_p = p > 0.0 ? f * nn * (pp / p) : 0.0;
    return {rate_n, rate_p, gain};
}

// Per-edge coefficients, indexed by the lower cell of each edge: the edge
// e = (c, r) contributes (bwd[e] n_r - fwd[e] n_c)/h^2 to the divergence at c
// and the negated products at r, so charge telescoping is exact in floating
// point because both cells read the same stored values.
struct EdgeCoeffs {
    std::array<std::vector<double>, 3> fwd_n, bwd_n, fwd_p, bwd_p;
};

inline void coeff_pair(StepScheme::Flux flux, double dphi, double& fwd, double& bwd) {
    if (flux == StepScheme::Flux::ScharfetterGummel) {
        fwd = bernoulli(dphi);
        bwd = std::max(fwd + dphi, 0.0); // B(-z) = B(z) + z
    } else {
        fwd = 1.0 + std::max(-dphi, 0.0);
        bwd = 1.0 + std::max(dphi, 0.0);
    }
}

EdgeCoeffs compute_edges(const CarrierState& s, const StepScheme& scheme,
                         const ModelFields& mf) {
    const Grid& g = s.n.grid();
    const int n = g.cells_per_axis();
    const int dim = g.dim();
    const std::size_t cells = g.cell_count();
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * n};

    ScalarField phi_n(g), phi_p(g);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        phi_n[idx] = s.psi[idx] + mf.v_n[idx];
        phi_p[idx] = -s.psi[idx] + mf.v_p[idx];
    }

    EdgeCoeffs ec;
    const int nk = dim == 3 ? n : 1;
    for (int d = 0; d < dim; ++d) {
        ec.fwd_n[d].assign(cells, 0.0);
        ec.bwd_n[d].assign(cells, 0.0);
        ec.fwd_p[d].assign(cells, 0.0);
        ec.bwd_p[d].assign(cells, 0.0);
        const std::size_t sd = stride[d];
        for (int k = 0; k < nk; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const int ijk[3] = {i, j, k};
                    if (ijk[d] == n - 1) continue;
                    const std::size_t c = g.index(i, j, k);
                    coeff_pair(scheme.flux, phi_n[c + sd] - phi_n[c], ec.fwd_n[d][c],
                               ec.bwd_n[d][c]);
                    coeff_pair(scheme.flux, phi_p[c + sd] - phi_p[c], ec.fwd_p[d][c],
                               ec.bwd_p[d][c]);
                }
    }
    return ec;
}

struct CellLimit {
    double lambda = 0.0;
    int i = 0, j = 0, k = 0;
    char species = 'n';
};

CellLimit max_outflow(const CarrierState& s, const ModelData& m, const EdgeCoeffs& ec,
                      const ModelFields& mf) {
    const Grid& g = s.n.grid();
    const int n = g.cells_per_axis();
    const int dim = g.dim();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * n};
    const int nk = dim == 3 ? n : 1;
    CellLimit lim;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int ijk[3] = {i, j, k};
                const std::size_t c = g.index(i, j, k);
                double out_n = 0.0, out_p = 0.0;
                for (int d = 0; d < dim; ++d) {
                    if (ijk[d] < n - 1) {
                        out_n += ec.fwd_n[d][c];
                        out_p += ec.fwd_p[d][c];
                    }
                    if (ijk[d] > 0) {
                        out_n += ec.bwd_n[d][c - stride[d]];
                        out_p += ec.bwd_p[d][c - stride[d]];
                    }
                }
                const ReactionSplit rs = reaction_split(m.rec, s.n[c], s.p[c], mf.mu_prod[c]);
                const double lam_n = out_n * inv_h2 + std::max(rs.loss_rate_n, 0.0);
                const double lam_p = out_p * inv_h2 + std::max(rs.loss_rate_p, 0.0);
                if (lam_n > lim.lambda) lim = {lam_n, i, j, k, 'n'};
                if (lam_p > lim.lambda) lim = {lam_p, i, j, k, 'p'};
            }
    return lim;
}

double positivity_dt_impl(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                          const EdgeCoeffs& ec, const ModelFields& mf) {
    const double safety =
        scheme.dt_policy == StepScheme::DtPolicy::AutoPositivity ? scheme.safety : 1.0;
    if (!(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("positivity_dt: safety must lie in (0,1]");
    const CellLimit lim = max_outflow(s, m, ec, mf);
    if (lim.lambda <= 0.0) return std::numeric_limits<double>::infinity();
    double dt = safety / lim.lambda;
    // dt * lambda <= safety must hold in floating point, not just exactly.
    while (dt * lim.lambda > safety) dt = std::nextafter(dt, 0.0);
    return dt;
}

} // namespace

double positivity_dt(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                     const ModelFields& mf) {
    return positivity_dt_impl(s, m, scheme, compute_edges(s, scheme, mf), mf);
}

double positivity_dt(const CarrierState& s, const ModelData& m, const StepScheme& scheme) {
    return positivity_dt(s, m, scheme, make_model_fields(m));
}

CarrierState step(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                  const PoissonSolver& solver, const ModelFields& mf) {
    const Grid& g = s.n.grid();
    if (!(g == m.grid) || !(g == solver.grid()))
        throw std::invalid_argument("step: state, model and solver grids differ");

    const EdgeCoeffs ec = compute_edges(s, scheme, mf);

    double dt;
    if (scheme.dt_policy == StepScheme::DtPolicy::Fixed) {
        dt = scheme.fixed_dt;
        const CellLimit lim = max_outflow(s, m, ec, mf);
        if (dt * lim.lambda > 1.0) {
            std::ostringstream msg;
            msg << "step: fixed dt = " << dt << " violates positivity at cell (" << lim.i << ","
                << lim.j << "," << lim.k << ") species " << lim.species
                << "; maximal admissible dt = " << 1.0 / lim.lambda;
            throw std::runtime_error(msg.str());
        }
    } else {
        dt = positivity_dt_impl(s, m, scheme, ec, mf);
    }

    const int n = g.cells_per_axis();
    const int dim = g.dim();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * n};
    const int nk = dim == 3 ? n : 1;

    CarrierState next{ScalarField(g), ScalarField(g), ScalarField(g)};
    next.t = s.t + dt;
    next.step_count = s.step_count + 1;

    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int ijk[3] = {i, j, k};
                const std::size_t c = g.index(i, j, k);
                double out_n = 0.0, in_n = 0.0, out_p = 0.0, in_p = 0.0;
                for (int d = 0; d < dim; ++d) {
                    if (ijk[d] < n - 1) {
                        const std::size_t r = c + stride[d];
                        out_n += ec.fwd_n[d][c];
                        in_n += ec.bwd_n[d][c] * s.n[r];
                        out_p += ec.fwd_p[d][c];
                        in_p += ec.bwd_p[d][c] * s.p[r];
                    }
                    if (ijk[d] > 0) {
                        const std::size_t l = c - stride[d];
                        out_n += ec.bwd_n[d][l];
                        in_n += ec.fwd_n[d][l] * s.n[l];
                        out_p += ec.bwd_p[d][l];
                        in_p += ec.fwd_p[d][l] * s.p[l];
                    }
                }
                const ReactionSplit rs = reaction_split(m.rec, s.n[c], s.p[c], mf.mu_prod[c]);
                // Grouped so each term is nonnegative whenever dt * lambda <= 1:
                // positivity holds in exact arithmetic and in floating point.
                next.n[c] = s.n[c] * (1.0 - dt * (out_n * inv_h2 + rs.loss_rate_n)) +
                            dt * (in_n * inv_h2 + rs.gain);
                next.p[c] = s.p[c] * (1.0 - dt * (out_p * inv_h2 + rs.loss_rate_p)) +
                            dt * (in_p * inv_h2 + rs.gain);
            }

    ScalarField rhs(g);
    for (std::size_t idx = 0; idx < rhs.size(); ++idx)
        rhs[idx] = next.n[idx] - next.p[idx] - m.doping[idx];
    next.psi = solver.solve(rhs);

    if (!all_finite(next.n) || !all_finite(next.p))
        throw std::runtime_error("step: non-finite density after update");
    return next;
}

CarrierState step(const CarrierState& s, const ModelData& m, const StepScheme& scheme,
                  const PoissonSolver& solver) {
    return step(s, m, scheme, solver, make_model_fields(m));
}

CarrierState make_state(ScalarField n, ScalarField p, const ModelData& m,
                        const PoissonSolver& solver, double t) {
    ScalarField rhs(n.grid());
    for (std::size_t idx = 0; idx < rhs.size(); ++idx)
        rhs[idx] = n[idx] - p[idx] - m.doping[idx];
    CarrierState s(std::move(n), std::move(p), solver.solve(rhs));
    s.t = t;
    return s;
}

} // namespace ddp
