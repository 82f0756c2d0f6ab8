#include "ddp/model.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ddp {

double PotentialSpec::value(const std::array<double, 3>& x, int dim) const {
    double q = 0.0;
    for (int d = 0; d < dim; ++d) {
        double dx = x[d] - center[d];
        q += dx * dx;
    }
    double v = 0.5 * curvature * q + offset;
    if (form == Form::ShiftedQuadratic)
        for (int d = 0; d < dim; ++d) v += amplitude * std::cos(frequency[d] * x[d]);
    return v;
}

std::array<double, 3> PotentialSpec::gradient(const std::array<double, 3>& x, int dim) const {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) g[d] = curvature * (x[d] - center[d]);
    if (form == Form::ShiftedQuadratic)
        for (int d = 0; d < dim; ++d)
            g[d] -= amplitude * frequency[d] * std::sin(frequency[d] * x[d]);
    return g;
}

double PotentialSpec::laplacian(const std::array<double, 3>& x, int dim) const {
    double lap = curvature * dim;
    if (form == Form::ShiftedQuadratic)
        for (int d = 0; d < dim; ++d)
            lap -= amplitude * frequency[d] * frequency[d] * std::cos(frequency[d] * x[d]);
    return lap;
}

double PotentialSpec::convexity(int dim) const {
    if (form == Form::Quadratic) return curvature;
    double wmax = 0.0;
    for (int d = 0; d < dim; ++d) wmax = std::max(wmax, frequency[d] * frequency[d]);
    return curvature - std::abs(amplitude) * wmax;
}

double PotentialSpec::laplacian_bound(int dim) const {
    double b = curvature * dim;
    if (form == Form::ShiftedQuadratic)
        for (int d = 0; d < dim; ++d)
            b += std::abs(amplitude) * frequency[d] * frequency[d];
    return b;
}

double PotentialSpec::lower_bound(int dim) const {
    double b = offset;
    if (form == Form::ShiftedQuadratic) b -= std::abs(amplitude) * dim;
    return b;
}

ScalarField PotentialSpec::evaluate(const Grid& g) const {
    ScalarField out(g);
    const int n = g.cells_per_axis();
    const int nk = g.dim() == 3 ? n : 1;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                out.at(i, j, k) = value(g.center(i, j, k), g.dim());
    return out;
}

void PotentialSpec::normalize(const Grid& g) {
    ScalarField v = evaluate(g);
    ScalarField mu(g);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) mu[idx] = std::exp(-v[idx]);
    double total = integrate(mu);
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error("PotentialSpec::normalize: integral of e^-V is not positive");
    offset += std::log(total);
}

RecombinationModel RecombinationModel::band_to_band(double c, double sigma, double delta) {
    RecombinationModel m;
    m.kind = Kind::BandToBand;
    m.c = c;
    m.sigma = sigma;
    m.delta = delta;
    return m;
}

RecombinationModel RecombinationModel::srh(double r1, double r2, double r3, double sigma,
                                           double delta) {
    RecombinationModel m;
    m.kind = Kind::SRH;
    m.r1 = r1;
    m.r2 = r2;
    m.r3 = r3;
    m.sigma = sigma;
    m.delta = delta;
    return m;
}

RecombinationModel RecombinationModel::auger(double cn, double cp, double sigma, double delta) {
    RecombinationModel m;
    m.kind = Kind::Auger;
    m.cn = cn;
    m.cp = cp;
    m.sigma = sigma;
    m.delta = delta;
    return m;
}

RecombinationModel RecombinationModel::custom(std::function<double(double, double)> f, double c1,
                                              double c2, double sigma, double delta) {
    RecombinationModel m;
    m.kind = Kind::Custom;
    m.custom_f = std::move(f);
    m.custom_c1 = c1;
    m.custom_c2 = c2;
    m.sigma = sigma;
    m.delta = delta;
    return m;
}

double RecombinationModel::f(double n, double p) const {
    switch (kind) {
    case Kind::BandToBand: return c;
    case Kind::SRH: return 1.0 / (r1 * n + r2 * p + r3);
    case Kind::Auger: return cn * n + cp * p;
    case Kind::Custom: return custom_f(n, p);
    }
    return 0.0;
}

double RecombinationModel::lipschitz_c1() const {
    switch (kind) {
    case Kind::BandToBand: return 0.0;
    case Kind::SRH: return std::max(r1, r2) / (r3 * r3);
    case Kind::Auger: return std::max(cn, cp);
    case Kind::Custom: return custom_c1;
    }
    return 0.0;
}

double RecombinationModel::growth_c2() const {
    switch (kind) {
    case Kind::BandToBand: return c;
    case Kind::SRH: return 1.0 / r3;
    case Kind::Auger: return std::max(cn, cp);
    case Kind::Custom: return custom_c2;
    }
    return 0.0;
}

ModelData ModelData::make(const Grid& g, PotentialSpec vn, PotentialSpec vp, ScalarField doping,
                          RecombinationModel rec, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("ModelData: epsilon must be > 0");
    if (!(doping.grid() == g))
        throw std::invalid_argument("ModelData: doping field lives on a different grid");

    vn.normalize(g);
    vp.normalize(g);

    ModelData m{g, vn, vp, std::move(doping), std::move(rec), epsilon};
    m.rho_n = vn.convexity(g.dim());
    m.rho_p = vp.convexity(g.dim());
    m.lap_bound = std::max(vn.laplacian_bound(g.dim()), vp.laplacian_bound(g.dim()));
    m.v_lower = std::min(vn.lower_bound(g.dim()), vp.lower_bound(g.dim()));

    // V_n - V_p is bounded on R^dim iff the quadratic parts agree; the cos
    // perturbations and offsets are bounded by construction.
    m.gap_bounded = vn.curvature == vp.curvature && vn.center == vp.center;
    ScalarField fn = vn.evaluate(g);
    ScalarField fp = vp.evaluate(g);
    double sup = 0.0;
    for (std::size_t idx = 0; idx < fn.size(); ++idx)
        sup = std::max(sup, std::abs(fn[idx] - fp[idx]));
    m.gap_bound = sup;
    return m;
}

namespace {

double normalization_integral(const PotentialSpec& v, const Grid& g) {
    ScalarField field = v.evaluate(g);
    ScalarField mu(g);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) mu[idx] = std::exp(-field[idx]);
    return integrate(mu);
}

ScalarField equilibrium_field(const PotentialSpec& v, const Grid& g, const char* name) {
    double total = normalization_integral(v, g);
    if (std::abs(total - 1.0) > 1e-4) {
        std::ostringstream msg;
        msg << "eval_equilibria: integral of " << name << " drifted to " << total
            << " on this grid (box too small or potential not normalized here)";
        throw std::runtime_error(msg.str());
    }
    ScalarField field = v.evaluate(g);
    ScalarField mu(g);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) mu[idx] = std::exp(-field[idx]);
    return mu;
}

} // namespace

std::pair<ScalarField, ScalarField> eval_equilibria(const ModelData& m, const Grid& g) {
    return {equilibrium_field(m.v_n, g, "mu_n"), equilibrium_field(m.v_p, g, "mu_p")};
}

namespace {

void require_nonnegative(const ScalarField& f, const char* name) {
    for (std::size_t idx = 0; idx < f.size(); ++idx)
        if (f[idx] < 0.0) {
            std::ostringstream msg;
            msg << "recombination rate: negative density " << name << " at cell " << idx;
            throw std::invalid_argument(msg.str());
        }
}

ScalarField rate_impl(const ScalarField& n, const ScalarField& p, const ModelData& m,
                      double sigma) {
    require_same_grid(n, p, "recombination rate");
    require_nonnegative(n, "n");
    require_nonnegative(p, "p");
    auto [mu_n, mu_p] = eval_equilibria(m, n.grid());
    const double d2 = m.rec.delta * m.rec.delta;
    ScalarField out(n.grid());
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        double nn = n[idx];
        double pp = p[idx];
        if (sigma > 0.0) {
            nn = nn / (1.0 + sigma * nn);
            pp = pp / (1.0 + sigma * pp);
        }
        out[idx] = m.rec.f(nn, pp) * (nn * pp - d2 * mu_n[idx] * mu_p[idx]);
    }
    return out;
}

} // namespace

ScalarField recombination_rate(const ScalarField& n, const ScalarField& p, const ModelData& m) {
    return rate_impl(n, p, m, 0.0);
}

ScalarField regularized_rate(const ScalarField& n, const ScalarField& p, const ModelData& m) {
    return rate_impl(n, p, m, m.rec.sigma);
}

double growth_constant(const ModelData& m) {
    const double s = m.rec.sigma;
    if (!(s > 0.0)) throw std::invalid_argument("growth_constant: sigma must be > 0");
    return m.rec.growth_c2() * (1.0 + 2.0 / s + 1.0 / (s * s));
}

double lipschitz_bound(const ModelData& m) {
    const double s = m.rec.sigma;
    if (!(s > 0.0))
        throw std::invalid_argument(
            "lipschitz_bound: the unregularized rate has no global Lipschitz constant "
            "(sigma must be > 0)");
    const double c1 = m.rec.lipschitz_c1();
    const double c2 = m.rec.growth_c2();
    return 2.0 * c1 * std::exp(-2.0 * m.v_lower) + (2.0 * c2 / s) * (1.0 + 2.0 / s) +
           2.0 * c1 / (s * s);
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

void ValidationReport::print(std::ostream& os) const {
    for (const auto& c : checks)
        os << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    if (!tail_ok)
        os << "[warn] boundary tail: mu(boundary)/max(mu) = " << tail_ratio_n << " (n), "
           << tail_ratio_p << " (p) exceeds 1e-10; consider a larger box\n";
}

namespace {

double boundary_tail_ratio(const PotentialSpec& v, const Grid& g) {
    const int n = g.cells_per_axis();
    const int nk = g.dim() == 3 ? n : 1;
    double mu_max = 0.0, mu_boundary = 0.0;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double mu = std::exp(-v.value(g.center(i, j, k), g.dim()));
                mu_max = std::max(mu_max, mu);
                bool on_face = i == 0 || i == n - 1 || j == 0 || j == n - 1 ||
                               (g.dim() == 3 && (k == 0 || k == n - 1));
                if (on_face) mu_boundary = std::max(mu_boundary, mu);
            }
    return mu_max > 0.0 ? mu_boundary / mu_max : 0.0;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

} // namespace

ValidationReport validate_hypotheses(const ModelData& m, const Grid& g) {
    ValidationReport rep;
    rep.rho_n = m.rho_n;
    rep.rho_p = m.rho_p;
    rep.lap_bound = m.lap_bound;
    rep.gap_bound = m.gap_bound;
    rep.v_lower = m.v_lower;

    rep.checks.push_back({"H1a convexity",
                          m.rho_n > 0.0 && m.rho_p > 0.0,
                          "rho_n = " + fmt(m.rho_n) + ", rho_p = " + fmt(m.rho_p)});
    rep.checks.push_back({"H1a Laplacian bound",
                          std::isfinite(m.lap_bound),
                          "K = " + fmt(m.lap_bound)});
    rep.checks.push_back({"H1b potential gap",
                          m.gap_bounded,
                          m.gap_bounded
                              ? "K' = " + fmt(m.gap_bound)
                              : "V_n - V_p unbounded (quadratic parts differ); on-box sup " +
                                    fmt(m.gap_bound) + " at the box corner grows with L"});

    // Lipschitz, growth and sign of F on >= 10^4 random nonnegative samples in [0,10]^2.
    std::mt19937 rng(0x5eed2bu);
    std::uniform_real_distribution<double> uni(0.0, 10.0);
    const int samples = 10000;
    const double c1 = m.rec.lipschitz_c1();
    const double c2 = m.rec.growth_c2();
    int sign_bad = 0, lip_bad = 0, growth_bad = 0;
    for (int s = 0; s < samples; ++s) {
        double n1 = uni(rng), p1 = uni(rng), n2 = uni(rng), p2 = uni(rng);
        double f1 = m.rec.f(n1, p1), f2 = m.rec.f(n2, p2);
        if (f1 < 0.0) ++sign_bad;
        double lhs = std::abs(f1 - f2);
        double rhs = c1 * (std::abs(n1 - n2) + std::abs(p1 - p2));
        if (lhs > rhs * (1.0 + 1e-12) + 1e-15) ++lip_bad;
        if (std::abs(f1) > c2 * (1.0 + n1 + p1) * (1.0 + 1e-12)) ++growth_bad;
    }
    rep.checks.push_back({"H2b sign F >= 0", sign_bad == 0,
                          sign_bad == 0 ? "on " + std::to_string(samples) + " samples"
                                        : std::to_string(sign_bad) + " negative samples"});
    rep.checks.push_back({"H2b Lipschitz", lip_bad == 0,
                          "c1 = " + fmt(c1) + ", violations " + std::to_string(lip_bad)});
    rep.checks.push_back({"H2b linear growth", growth_bad == 0,
                          "c2 = " + fmt(c2) + ", violations " + std::to_string(growth_bad)});

    rep.doping_l1 = lr_norm(m.doping, 1.0);
    rep.doping_linf = lr_norm(m.doping, std::numeric_limits<double>::infinity());
    bool h3 = std::isfinite(rep.doping_l1) && std::isfinite(rep.doping_linf);
    rep.checks.push_back({"H3 doping norms", h3,
                          "|D|_1 = " + fmt(rep.doping_l1) + ", |D|_inf = " + fmt(rep.doping_linf)});

    rep.norm_drift_n = std::abs(normalization_integral(m.v_n, g) - 1.0);
    rep.norm_drift_p = std::abs(normalization_integral(m.v_p, g) - 1.0);
    bool norm_ok = rep.norm_drift_n <= 1e-6 && rep.norm_drift_p <= 1e-6;
    rep.checks.push_back({"normalization of mu", norm_ok,
                          "drift n = " + fmt(rep.norm_drift_n) +
                              ", p = " + fmt(rep.norm_drift_p)});

    rep.tail_ratio_n = boundary_tail_ratio(m.v_n, g);
    rep.tail_ratio_p = boundary_tail_ratio(m.v_p, g);
    rep.tail_ok = rep.tail_ratio_n <= 1e-10 && rep.tail_ratio_p <= 1e-10;
    return rep;
}

TransformedVariables transform_variables(const ScalarField& n, const ScalarField& p,
                                         const ModelData& m) {
    require_same_grid(n, p, "transform_variables");
    const Grid& g = n.grid();
    TransformedVariables tv{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
    const int nc = g.cells_per_axis();
    const int nk = g.dim() == 3 ? nc : 1;
    const double half_k = m.lap_bound;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < nc; ++j)
            for (int i = 0; i < nc; ++i) {
                auto x = g.center(i, j, k);
                std::size_t idx = g.index(i, j, k);
                double wn = std::exp(0.5 * m.v_n.value(x, g.dim()));
                double wp = std::exp(0.5 * m.v_p.value(x, g.dim()));
                if (!std::isfinite(wn) || !std::isfinite(wp)) {
                    std::ostringstream msg;
                    msg << "transform_variables: e^{V/2} overflows at cell " << idx;
                    throw std::runtime_error(msg.str());
                }
                tv.u[idx] = n[idx] * wn;
                tv.v[idx] = p[idx] * wp;

                auto gn = m.v_n.gradient(x, g.dim());
                auto gp = m.v_p.gradient(x, g.dim());
                double gn2 = 0.0, gp2 = 0.0;
                for (int d = 0; d < g.dim(); ++d) {
                    gn2 += gn[d] * gn[d];
                    gp2 += gp[d] * gp[d];
                }
                tv.a_n[idx] = 0.25 * gn2 - 0.5 * m.v_n.laplacian(x, g.dim()) + half_k;
                tv.a_p[idx] = 0.25 * gp2 - 0.5 * m.v_p.laplacian(x, g.dim()) + half_k;
            }
    return tv;
}

} // namespace ddp
