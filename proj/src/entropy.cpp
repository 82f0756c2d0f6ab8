#include "ddp/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddp {

namespace {

// x (ln(x/y) - 1) + y, the Bregman integrand; >= 0 for x >= 0, y > 0.
inline double bregman(double x, double y) {
    if (x <= 0.0) return y;
    return x * (std::log(x / y) - 1.0) + y;
}

// integral f |grad ln(f/ref)|^2 with central differences of ln(max(f,floor)/ref);
// cells where f < 1e-14 max(f) contribute 0 (the integrand vanishes with f).
double log_gradient_term(const ScalarField& f, const ScalarField& ref) {
    const Grid& g = f.grid();
    double fmax = 0.0;
    for (double v : f.values()) fmax = std::max(fmax, v);
    if (fmax <= 0.0) return 0.0;
    const double floor = 1e-300 * fmax;
    const double cutoff = 1e-14 * fmax;

    ScalarField logratio(g);
    for (std::size_t idx = 0; idx < logratio.size(); ++idx)
        logratio[idx] = std::log(std::max(f[idx], floor) / ref[idx]);
    std::vector<ScalarField> grad = gradient(logratio);

    ScalarField integrand(g, 0.0);
    for (std::size_t idx = 0; idx < integrand.size(); ++idx) {
        if (f[idx] < cutoff) continue;
        double g2 = 0.0;
        for (const auto& comp : grad) g2 += comp[idx] * comp[idx];
        integrand[idx] = f[idx] * g2;
    }
    return integrate(integrand);
}

} // namespace

double relative_entropy(const CarrierState& s, const SteadyState& eq) {
    require_same_grid(s.n, eq.n_inf, "relative_entropy");
    for (std::size_t idx = 0; idx < eq.n_inf.size(); ++idx)
        if (!(eq.n_inf[idx] > 0.0) || !(eq.p_inf[idx] > 0.0))
            throw std::invalid_argument(
                "relative_entropy: steady densities must be strictly positive");

    const Grid& g = s.n.grid();
    ScalarField breg(g);
    for (std::size_t idx = 0; idx < breg.size(); ++idx)
        breg[idx] = bregman(s.n[idx], eq.n_inf[idx]) + bregman(s.p[idx], eq.p_inf[idx]);
    double e = integrate(breg);

    ScalarField dpsi(g);
    for (std::size_t idx = 0; idx < dpsi.size(); ++idx)
        dpsi[idx] = s.psi[idx] - eq.psi_inf[idx];
    std::vector<ScalarField> grad = gradient(dpsi);
    ScalarField g2(g, 0.0);
    for (const auto& comp : grad)
        for (std::size_t idx = 0; idx < g2.size(); ++idx) g2[idx] += comp[idx] * comp[idx];
    e += 0.5 * integrate(g2);
    return e;
}

double entropy_dissipation(const CarrierState& s, const ModelData& m, double d_n, double d_p) {
    const Grid& g = s.n.grid();
    auto [mu_n, mu_p] = eval_equilibria(m, g);

    ScalarField gibbs_n(g), gibbs_p(g);
    for (std::size_t idx = 0; idx < gibbs_n.size(); ++idx) {
        gibbs_n[idx] = d_n * std::exp(-s.psi[idx]) * mu_n[idx];
        gibbs_p[idx] = d_p * std::exp(s.psi[idx]) * mu_p[idx];
    }
    double diss = log_gradient_term(s.n, gibbs_n) + log_gradient_term(s.p, gibbs_p);

    ScalarField rate = recombination_rate(s.n, s.p, m);
    ScalarField reaction(g, 0.0);
    for (std::size_t idx = 0; idx < reaction.size(); ++idx) {
        const double np = s.n[idx] * s.p[idx];
        if (np <= 0.0) continue; // R ln(np/mu mu) -> 0 as np -> 0
        double logterm = std::log(np / (mu_n[idx] * mu_p[idx]));
        logterm = std::clamp(logterm, -700.0, 700.0);
        reaction[idx] = rate[idx] * logterm;
    }
    diss += integrate(reaction);
    return diss;
}

std::vector<EntropyReport> convergence_report(const std::vector<CarrierState>& snapshots,
                                              const SteadyState& eq, const ModelData& m) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<EntropyReport> reports;
    reports.reserve(snapshots.size());
    for (const CarrierState& s : snapshots) {
        require_same_grid(s.n, eq.n_inf, "convergence_report");
        EntropyReport r;
        r.t = s.t;
        r.mass_n = integrate(s.n);
        r.mass_p = integrate(s.p);
        r.charge = r.mass_n - r.mass_p;
        r.linf_n = lr_norm(s.n, inf);
        r.linf_p = lr_norm(s.p, inf);
        r.l2_n = lr_norm(s.n, 2.0);
        r.l2_p = lr_norm(s.p, 2.0);
        r.entropy = relative_entropy(s, eq);
        r.dissipation = entropy_dissipation(s, m, eq.d_n, eq.d_p);
        ScalarField dn(s.n.grid()), dp(s.n.grid());
        for (std::size_t idx = 0; idx < dn.size(); ++idx) {
            dn[idx] = s.n[idx] - eq.n_inf[idx];
            dp[idx] = s.p[idx] - eq.p_inf[idx];
        }
        r.l1_dist_n = lr_norm(dn, 1.0);
        r.l1_dist_p = lr_norm(dp, 1.0);
        reports.push_back(r);
    }
    return reports;
}

UniformBounds uniform_bounds(const std::vector<EntropyReport>& reports) {
    UniformBounds b;
    for (const auto& r : reports) {
        b.sup_l1_n = std::max(b.sup_l1_n, r.mass_n);
        b.sup_l1_p = std::max(b.sup_l1_p, r.mass_p);
        b.sup_l2_n = std::max(b.sup_l2_n, r.l2_n);
        b.sup_l2_p = std::max(b.sup_l2_p, r.l2_p);
        b.sup_linf_n = std::max(b.sup_linf_n, r.linf_n);
        b.sup_linf_p = std::max(b.sup_linf_p, r.linf_p);
    }
    return b;
}

} // namespace ddp
