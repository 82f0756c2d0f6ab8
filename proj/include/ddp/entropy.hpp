#ifndef DDP_ENTROPY_HPP
#define DDP_ENTROPY_HPP

/// @file entropy.hpp
/// @brief Relative entropy, entropy dissipation and the per-sample convergence
///        diagnostics (masses, charge, L^r norms, distances to steady state).

#include "ddp/dynamics.hpp"
#include "ddp/steady.hpp"

#include <vector>

namespace ddp {

struct EntropyReport {
    double t = 0.0;
    double mass_n = 0.0, mass_p = 0.0;
    double charge = 0.0;
    double linf_n = 0.0, linf_p = 0.0;
    double l2_n = 0.0, l2_p = 0.0;
    double entropy = 0.0;
    double dissipation = 0.0;
    double l1_dist_n = 0.0, l1_dist_p = 0.0;
};

/// Bregman relative entropy plus the electrostatic term:
/// integral [n (ln(n/n_inf) - 1) + n_inf] + same for p
/// + (1/2) integral |grad(psi - psi_inf)|^2.
/// Cells with n = 0 contribute n_inf (the 0 ln 0 = 0 convention).
double relative_entropy(const CarrierState& s, const SteadyState& eq);

/// Nonnegative dissipation:
/// integral n |grad ln(n/N)|^2 + integral p |grad ln(p/P)|^2
/// + integral R ln(np / (mu_n mu_p)),
/// with N = D_n e^{-psi(t)} mu_n and P = D_p e^{psi(t)} mu_p.
double entropy_dissipation(const CarrierState& s, const ModelData& m, double d_n, double d_p);

/// One report per snapshot: masses, charge, norms, entropy, dissipation and
/// L1 distances to the steady state.
std::vector<EntropyReport> convergence_report(const std::vector<CarrierState>& snapshots,
                                              const SteadyState& eq, const ModelData& m);

/// Sup over time of each monitored norm, the uniform-in-time certificate.
struct UniformBounds {
    double sup_l1_n = 0.0, sup_l1_p = 0.0;
    double sup_l2_n = 0.0, sup_l2_p = 0.0;
    double sup_linf_n = 0.0, sup_linf_p = 0.0;
};

UniformBounds uniform_bounds(const std::vector<EntropyReport>& reports);

} // namespace ddp

#endif
