#ifndef BIOFV_MODEL_HPP
#define BIOFV_MODEL_HPP

#include <optional>
#include <string>

namespace biofv {

/// Physical parameters of the coupled nutrient/biomass system.
///
/// The biomass diffusion nonlinearity is f(M) = M^b / (1-M)^a, the nutrient
/// uptake is Monod-limited with half-saturation kappa4, and the Dirichlet
/// data are S = 1 and M = MD on the whole boundary.
struct ModelParams {
    double d1 = 4.1667;   ///< nutrient diffusivity
    double d2 = 4.2;      ///< biomass diffusivity
    double kappa1 = 793.65;
    double kappa2 = 0.067;
    double kappa3 = 1.0;
    double kappa4 = 0.4;
    double a = 2.0;       ///< singularity exponent, >= 1
    double b = 1.0;       ///< degeneracy exponent, >= 0
    double MD = 0.0;      ///< Dirichlet biomass value, in [0,1)

    static constexpr double SD = 1.0;  ///< Dirichlet nutrient value

    /// Throws std::invalid_argument if the parameter ranges are violated
    /// (d1,d2 > 0, kappa_i >= 0, kappa4 > 0, a >= 1, b >= 0, 0 <= MD < 1).
    void validate() const;
};

/// Which evaluation branch F(M) uses.
enum class ClosedForm { AB_2_1, AB_4_4, Quadrature };

/// Pointwise nonlinearities of the model: the diffusion nonlinearity f and
/// its primitive F, the reaction rates g and h, their partial derivatives,
/// and the entropy machinery used by the invariant monitors.
///
/// All functions are pure; a Nonlinearity is safe to share across threads.
/// Inputs outside the stated domains raise std::domain_error -- there is no
/// clamping anywhere, keeping iterates inside (0,1) is the solver's job.
class Nonlinearity {
public:
    explicit Nonlinearity(const ModelParams& params);

    const ModelParams& params() const { return params_; }
    ClosedForm closed_form() const { return branch_; }

    /// f(M) = M^b / (1-M)^a on [0,1).
    double f(double M) const;
    /// df/dM; equals f at no point in general. Diverges at M=0 for b in (0,1).
    double df_dM(double M) const;

    /// F(M) = int_0^M f(s) ds on [0,1), F(0) = 0. Closed form for
    /// (a,b) = (2,1) and (4,4), adaptive quadrature (abs. tol 1e-12) otherwise.
    double F(double M) const;

    /// Primitive of F with value 0 at 0 (used by Z and Z_eps).
    double F_antiderivative(double M) const;

    double g(double S, double M) const;   ///< -kappa1 S M / (kappa4 + S), <= 0
    double h(double S, double M) const;   ///< kappa3 S M / (kappa4 + S) - kappa2 M

    double dg_dS(double S, double M) const;
    double dg_dM(double S, double M) const;
    double dh_dS(double S, double M) const;
    double dh_dM(double S, double M) const;

    /// Z(M) = int_{MD}^M F(s) ds - F(MD) (M - MD); convex, minimum 0 at MD.
    /// Requires MD > 0.
    double Z(double M) const;

    /// Z_eps(M) = int_0^M F(s) ds - F(MD)(M - MD)
    ///          + eps (M log(M/MD) + MD - M), on [0,1).
    /// Integrates from 0 rather than MD, so Z_eps - eps*(Boltzmann part)
    /// differs from Z by the constant int_0^{MD} F(s) ds.
    double Z_eps(double M, double eps) const;

    /// W(M) = F(M) - F(MD) + eps log(M/MD), strictly increasing on (0,1),
    /// W(MD) = 0. Requires M in (0,1), MD in (0,1), eps > 0.
    double entropy_variable(double M, double eps) const;

    /// Unique M in (0,1) with entropy_variable(M, eps) = W, resolved to
    /// 1e-12 in M by safeguarded Newton/bisection.
    double entropy_inverse(double W, double eps) const;

private:
    ModelParams params_;
    ClosedForm branch_;
    double F_MD_;   // F(MD), cached for the entropy variable
};

}  // namespace biofv

#endif
