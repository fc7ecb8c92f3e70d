#include "biofv/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace biofv {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

void require_fraction(double M, const char* who) {
    if (!(M >= 0.0) || !(M < 1.0))
        throw std::domain_error(std::string(who) + ": M = " + std::to_string(M) +
                                " outside [0,1)");
}

}  // namespace

void ModelParams::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("ModelParams: " + msg); };
    if (!(d1 > 0.0) || !(d2 > 0.0)) fail("diffusivities must be positive");
    if (kappa1 < 0.0 || kappa2 < 0.0 || kappa3 < 0.0) fail("kappa1..kappa3 must be >= 0");
    if (!(kappa4 > 0.0)) fail("kappa4 must be > 0");
    if (!(a >= 1.0)) fail("exponent a must be >= 1");
    if (!(b >= 0.0)) fail("exponent b must be >= 0");
    if (!(MD >= 0.0) || !(MD < 1.0)) fail("MD must lie in [0,1)");
}

Nonlinearity::Nonlinearity(const ModelParams& params) : params_(params) {
    params_.validate();
    if (params_.a == 2.0 && params_.b == 1.0)
        branch_ = ClosedForm::AB_2_1;
    else if (params_.a == 4.0 && params_.b == 4.0)
        branch_ = ClosedForm::AB_4_4;
    else
        branch_ = ClosedForm::Quadrature;
    F_MD_ = F(params_.MD);
}

double Nonlinearity::f(double M) const {
    require_fraction(M, "f");
    return std::pow(M, params_.b) / std::pow(1.0 - M, params_.a);
}

double Nonlinearity::df_dM(double M) const {
    require_fraction(M, "df_dM");
    const double a = params_.a, b = params_.b;
    if (b == 0.0) return a * std::pow(1.0 - M, -(a + 1.0));
    if (M == 0.0) {
        if (b > 1.0) return 0.0;
        if (b == 1.0) return 1.0;
        return std::numeric_limits<double>::infinity();
    }
    // f' = M^{b-1} (1-M)^{-a-1} (b(1-M) + aM)
    return std::pow(M, b - 1.0) * std::pow(1.0 - M, -(a + 1.0)) * (b * (1.0 - M) + a * M);
}

double Nonlinearity::F(double M) const {
    require_fraction(M, "F");
    switch (branch_) {
        case ClosedForm::AB_2_1:
            return std::log1p(-M) + 1.0 / (1.0 - M) - 1.0;
        case ClosedForm::AB_4_4: {
            const double u = 1.0 - M;
            return (18.0 * M * M - 30.0 * M + 13.0) / (3.0 * u * u * u) + M +
                   4.0 * std::log1p(-M) - 13.0 / 3.0;
        }
        case ClosedForm::Quadrature:
            break;
    }
    if (M == 0.0) return 0.0;
    return GK::integrate([this](double s) { return f(s); }, 0.0, M, 20, 1e-14);
}

double Nonlinearity::F_antiderivative(double M) const {
    require_fraction(M, "F_antiderivative");
    if (branch_ == ClosedForm::AB_2_1)
        return -(2.0 - M) * std::log1p(-M) - 2.0 * M;
    if (M == 0.0) return 0.0;
    return GK::integrate([this](double s) { return F(s); }, 0.0, M, 20, 1e-14);
}

double Nonlinearity::g(double S, double M) const {
    return -params_.kappa1 * S * M / (params_.kappa4 + S);
}

double Nonlinearity::h(double S, double M) const {
    return params_.kappa3 * S * M / (params_.kappa4 + S) - params_.kappa2 * M;
}

double Nonlinearity::dg_dS(double S, double M) const {
    const double k4S = params_.kappa4 + S;
    return -params_.kappa1 * params_.kappa4 * M / (k4S * k4S);
}

double Nonlinearity::dg_dM(double S, double /*M*/) const {
    return -params_.kappa1 * S / (params_.kappa4 + S);
}

double Nonlinearity::dh_dS(double S, double M) const {
    const double k4S = params_.kappa4 + S;
    return params_.kappa3 * params_.kappa4 * M / (k4S * k4S);
}

double Nonlinearity::dh_dM(double S, double /*M*/) const {
    return params_.kappa3 * S / (params_.kappa4 + S) - params_.kappa2;
}

double Nonlinearity::Z(double M) const {
    require_fraction(M, "Z");
    if (!(params_.MD > 0.0))
        throw std::domain_error("Z requires MD > 0");
    const double MD = params_.MD;
    return (F_antiderivative(M) - F_antiderivative(MD)) - F_MD_ * (M - MD);
}

double Nonlinearity::Z_eps(double M, double eps) const {
    require_fraction(M, "Z_eps");
    if (!(params_.MD > 0.0))
        throw std::domain_error("Z_eps requires MD > 0");
    if (!(eps > 0.0))
        throw std::domain_error("Z_eps requires eps > 0");
    const double MD = params_.MD;
    const double boltzmann = (M == 0.0) ? MD : M * std::log(M / MD) + MD - M;
    return F_antiderivative(M) - F_MD_ * (M - MD) + eps * boltzmann;
}

double Nonlinearity::entropy_variable(double M, double eps) const {
    if (!(M > 0.0) || !(M < 1.0))
        throw std::domain_error("entropy_variable: M outside (0,1)");
    if (!(params_.MD > 0.0) || !(params_.MD < 1.0))
        throw std::domain_error("entropy_variable requires MD in (0,1)");
    if (!(eps > 0.0))
        throw std::domain_error("entropy_variable requires eps > 0");
    return F(M) - F_MD_ + eps * std::log(M / params_.MD);
}

double Nonlinearity::entropy_inverse(double W, double eps) const {
    if (!std::isfinite(W))
        throw std::invalid_argument("entropy_inverse: W must be finite");
    if (!(params_.MD > 0.0) || !(params_.MD < 1.0))
        throw std::domain_error("entropy_inverse requires MD in (0,1)");
    if (!(eps > 0.0))
        throw std::domain_error("entropy_inverse requires eps > 0");

    // W is strictly increasing with W -> -inf as M -> 0+ and +inf as M -> 1-.
    // Bracket the root, then run Newton with bisection fallback.
    double lo = 0.0, hi = 1.0;         // open bounds, never evaluated
    double x = params_.MD;
    double w = -W;                     // entropy_variable(MD) - W
    if (w == 0.0) return x;
    if (w > 0.0) hi = x; else lo = x;

    for (int it = 0; it < 200; ++it) {
        const double slope = f(x) + eps / x;
        double xn = x - w / slope;
        if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        const double wn = entropy_variable(xn, eps) - W;
        if (wn > 0.0) hi = xn; else lo = xn;
        const double dx = std::abs(xn - x);
        x = xn;
        w = wn;
        if (w == 0.0 || dx <= 1e-13 || hi - lo <= 1e-13) break;
    }
    return x;
}

}  // namespace biofv
