#ifndef DDP_MODEL_HPP
#define DDP_MODEL_HPP

/// @file model.hpp
/// @brief Physical data of the problem: confining potentials, normalized
///        equilibria, doping, recombination-generation models (plain and
///        sigma-regularized), and machine-checkable hypothesis validation.

#include "ddp/grid.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ddp {

/// Closed-form confining potential. Value, gradient and Laplacian are exact;
/// the additive offset is the normalization constant making integral(e^-V) = 1.
///
/// Quadratic:        V(x) = (curvature/2) |x - center|^2 + offset
/// ShiftedQuadratic: the quadratic plus amplitude * sum_d cos(frequency_d x_d)
struct PotentialSpec {
    enum class Form { Quadratic, ShiftedQuadratic };

    Form form = Form::Quadratic;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double curvature = 1.0;
    double amplitude = 0.0; // ShiftedQuadratic perturbation strength
    std::array<double, 3> frequency{1.0, 1.0, 1.0};
    double offset = 0.0;

    double value(const std::array<double, 3>& x, int dim) const;
    std::array<double, 3> gradient(const std::array<double, 3>& x, int dim) const;
    double laplacian(const std::array<double, 3>& x, int dim) const;

    /// Hessian lower bound rho; may be <= 0 for a badly wobbled spec.
    double convexity(int dim) const;
    /// sup |Delta V|, the bound K entering the validators and the A_i fields.
    double laplacian_bound(int dim) const;
    /// Global lower bound V_b with V(x) >= V_b everywhere.
    double lower_bound(int dim) const;

    /// Adjusts offset so that the midpoint quadrature of e^-V on g equals 1.
    void normalize(const Grid& g);

    /// Cellwise evaluation on a grid.
    ScalarField evaluate(const Grid& g) const;

    bool operator==(const PotentialSpec&) const = default;
};

/// Recombination-generation rate R = F(n,p) (np - delta^2 mu_n mu_p) with the
/// F of one of the classic mechanisms, plus the sigma cutoff parameter for the
/// regularized rate (sigma = 0 means the plain rate).
struct RecombinationModel {
    enum class Kind { BandToBand, SRH, Auger, Custom };

    Kind kind = Kind::BandToBand;
    double c = 1.0;                    // BandToBand: F = c
    double r1 = 1.0, r2 = 1.0, r3 = 1.0; // SRH: F = 1/(r1 n + r2 p + r3)
    double cn = 1.0, cp = 1.0;         // Auger: F = cn n + cp p
    std::function<double(double, double)> custom_f; // Custom
    double custom_c1 = 0.0, custom_c2 = 0.0;        // declared Lipschitz/growth constants
    double delta = 1.0;
    double sigma = 0.0;

    static RecombinationModel band_to_band(double c, double sigma = 0.0, double delta = 1.0);
    static RecombinationModel srh(double r1, double r2, double r3, double sigma = 0.0,
                                  double delta = 1.0);
    static RecombinationModel auger(double cn, double cp, double sigma = 0.0,
                                    double delta = 1.0);
    static RecombinationModel custom(std::function<double(double, double)> f, double c1,
                                     double c2, double sigma = 0.0, double delta = 1.0);

    double f(double n, double p) const;
    /// Lipschitz constant c1 of F on the nonnegative orthant (declared for Custom).
    double lipschitz_c1() const;
    /// Linear-growth constant c2 with |F| <= c2 (1 + n + p) (declared for Custom).
    double growth_c2() const;
};

/// Everything that defines one problem instance on a grid, with the validated
/// model constants precomputed from the closed forms.
struct ModelData {
    Grid grid;
    PotentialSpec v_n, v_p; // normalized on grid
    ScalarField doping;
    RecombinationModel rec;
    double epsilon = 1.0;

    double rho_n = 0.0, rho_p = 0.0; // convexity constants
    double lap_bound = 0.0;          // K: bound on |Delta V_n|, |Delta V_p|
    double gap_bound = 0.0;          // K': sup |V_n - V_p| measured on the grid
    bool gap_bounded = false;        // closed-form boundedness of V_n - V_p on R^dim
    double v_lower = 0.0;            // V_b: lower bound of both potentials

    static ModelData make(const Grid& g, PotentialSpec vn, PotentialSpec vp,
                          ScalarField doping, RecombinationModel rec, double epsilon = 1.0);
};

/// mu_i = e^{-V_i} cellwise on g; throws when the normalization integral on g
/// drifts from 1 by more than 1e-4 (box too small for the potential).
std::pair<ScalarField, ScalarField> eval_equilibria(const ModelData& m, const Grid& g);

/// Plain rate R = F(n,p)(np - delta^2 mu_n mu_p). Throws on negative densities.
ScalarField recombination_rate(const ScalarField& n, const ScalarField& p, const ModelData& m);

/// Regularized rate: R evaluated at (n/(1+sigma n), p/(1+sigma p)).
/// Identical to recombination_rate when sigma = 0.
ScalarField regularized_rate(const ScalarField& n, const ScalarField& p, const ModelData& m);

/// C_sigma = c2 (1 + 2/sigma + 1/sigma^2), the linear-growth constant of the
/// regularized rate. Requires sigma > 0.
double growth_constant(const ModelData& m);

/// K~ = 2 c1 e^{-2 V_b} + (2 c2/sigma)(1 + 2/sigma) + 2 c1/sigma^2, the
/// certified weighted-L2 Lipschitz constant of the regularized rate.
/// Requires sigma > 0.
double lipschitz_bound(const ModelData& m);

struct ValidationReport {
    struct Check {
        std::string name;
        bool pass;
        std::string detail;
    };
    std::vector<Check> checks;

    double rho_n = 0.0, rho_p = 0.0;
    double lap_bound = 0.0;
    double gap_bound = 0.0;
    double v_lower = 0.0;
    double doping_l1 = 0.0, doping_linf = 0.0;
    double norm_drift_n = 0.0, norm_drift_p = 0.0;
    double tail_ratio_n = 0.0, tail_ratio_p = 0.0;
    bool tail_ok = true; // warning only, not part of all_pass

    bool all_pass() const;
    void print(std::ostream& os) const;
};

/// Machine check of the model hypotheses: H1a (uniform convexity, bounded
/// Laplacians of the potentials), H1b (bounded potential gap), H2b
/// (Lipschitz, growth and sign of F on sampled inputs), H3 (integrable,
/// bounded doping), plus the normalization drift and the boundary-tail
/// warning. Failures are report entries, never exceptions.
ValidationReport validate_hypotheses(const ModelData& m, const Grid& g);

struct TransformedVariables {
    ScalarField u, v;     // u = n e^{V_n/2}, v = p e^{V_p/2}
    ScalarField a_n, a_p; // A_i = |grad V_i|^2/4 - (Delta V_i)/2 + K
};

/// The weighted-variable transform and its zero-order coefficients.
TransformedVariables transform_variables(const ScalarField& n, const ScalarField& p,
                                         const ModelData& m);

} // namespace ddp

#endif
