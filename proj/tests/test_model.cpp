#include <doctest.h>

#include "biofv/model.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

using namespace biofv;

namespace {

// Independent quadrature oracle: adaptive Simpson, kept deliberately apart
// from the Gauss-Kronrod rule used inside the library.
double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double floor = 5e-15 * std::abs(left + right);  // double resolution
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * std::max(tol, floor))
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, tol);
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 30);
}

ModelParams params_ab(double a, double b) {
    ModelParams p;  // test-case-1 constants
    p.a = a;
    p.b = b;
    return p;
}

}  // namespace

TEST_CASE("parameter validation enforces the admissible ranges") {
    CHECK_NOTHROW(ModelParams{}.validate());
    ModelParams p;
    p.d1 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.kappa4 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.a = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.b = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.MD = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("f: values, monotonicity, domain") {
    const Nonlinearity n21(params_ab(2, 1));
    const Nonlinearity n44(params_ab(4, 4));
    CHECK(n21.f(0.0) == 0.0);
    CHECK(n21.f(0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(n44.f(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(n21.f(1.0), std::domain_error);
    CHECK_THROWS_AS(n21.f(-0.1), std::domain_error);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 0.999);
    for (int i = 0; i < 100; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        if (a == b) continue;
        CHECK(n21.f(a) < n21.f(b));
        CHECK(n44.f(a) <= n44.f(b));
    }
}

TEST_CASE("F: frozen values and branch selection") {
    const Nonlinearity n21(params_ab(2, 1));
    const Nonlinearity n44(params_ab(4, 4));
    CHECK(n21.closed_form() == ClosedForm::AB_2_1);
    CHECK(n44.closed_form() == ClosedForm::AB_4_4);
    CHECK(n21.F(0.0) == 0.0);
    CHECK(n44.F(0.0) == 0.0);
    // log(0.5) + 2 - 1, cross-checked against the Simpson oracle
    CHECK(n21.F(0.5) == doctest::Approx(0.30685281944005466).epsilon(1e-14));
    const double oracle = integrate([&](double s) { return n21.f(s); }, 0.0, 0.5);
    CHECK(n21.F(0.5) == doctest::Approx(oracle).epsilon(1e-11));
    CHECK_THROWS_AS(n21.F(1.0), std::domain_error);
}

TEST_CASE("F: closed forms agree with quadrature on [0, 0.999]") {
    for (double ab : {2.0, 4.0}) {
        const Nonlinearity nl(ab == 2.0 ? params_ab(2, 1) : params_ab(4, 4));
        double quad = 0.0, prev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double M = 0.999 * i / 999.0;
            quad += integrate([&](double s) { return nl.f(s); }, prev, M);
            prev = M;
            const double closed = nl.F(M);
            // mixed tolerance: F grows like (1-M)^{1-a} near 1, where an
            // absolute 1e-10 would be below double resolution
            CHECK(std::abs(closed - quad) <= 1e-10 * (1.0 + std::abs(closed)));
        }
    }
}

TEST_CASE("F: generic exponents fall back to quadrature") {
    const Nonlinearity nl(params_ab(3, 2));
    CHECK(nl.closed_form() == ClosedForm::Quadrature);
    for (double M : {0.1, 0.5, 0.9}) {
        const double oracle = integrate([&](double s) { return nl.f(s); }, 0.0, M);
        CHECK(nl.F(M) == doctest::Approx(oracle).epsilon(1e-11));
    }
}

TEST_CASE("F diverges monotonically toward M = 1") {
    const Nonlinearity nl(params_ab(2, 1));
    double prev = nl.F(1.0 - 0.1);
    for (int k = 2; k <= 12; ++k) {
        const double cur = nl.F(1.0 - std::pow(10.0, -k));
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("g and h: frozen values and sign structure") {
    const Nonlinearity nl(params_ab(2, 1));
    CHECK(nl.g(0.0, 0.7) == 0.0);
    CHECK(nl.g(0.3, 0.0) == 0.0);
    CHECK(nl.h(0.8, 0.0) == 0.0);
    // kappa1 = 793.65, kappa4 = 0.4: g(1, 0.5) = -793.65 * 0.5 / 1.4
    CHECK(nl.g(1.0, 0.5) == doctest::Approx(-283.44642857142856).epsilon(1e-14));
    // kappa2 = 0.067, kappa3 = 1: h(1, 0.5) = 0.5/1.4 - 0.0335
    CHECK(nl.h(1.0, 0.5) == doctest::Approx(0.32364285714285715).epsilon(1e-13));
    // sign change at kappa* = kappa2 kappa4 / (kappa3 - kappa2)
    const double ks = 0.067 * 0.4 / (1.0 - 0.067);
    CHECK(nl.h(ks, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double S = u(rng), M = u(rng);
        CHECK(nl.g(S, M) <= 0.0);
        CHECK(nl.h(S, M) >= -nl.params().kappa2 * M - 1e-15);
    }
}

TEST_CASE("analytic derivatives match central finite differences") {
    const Nonlinearity nl(params_ab(2, 1));
    CHECK(nl.df_dM(0.5) > 0.0);
    CHECK(nl.dg_dM(1.0, 0.3) == doctest::Approx(-793.65 / 1.4).epsilon(1e-14));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uM(0.05, 0.9), uS(0.05, 0.95);
    const double e = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const double S = uS(rng), M = uM(rng);
        const double fd_f = (nl.f(M + e) - nl.f(M - e)) / (2 * e);
        CHECK(nl.df_dM(M) == doctest::Approx(fd_f).epsilon(1e-6));
        const double fd_gS = (nl.g(S + e, M) - nl.g(S - e, M)) / (2 * e);
        CHECK(nl.dg_dS(S, M) == doctest::Approx(fd_gS).epsilon(1e-6));
        const double fd_gM = (nl.g(S, M + e) - nl.g(S, M - e)) / (2 * e);
        CHECK(nl.dg_dM(S, M) == doctest::Approx(fd_gM).epsilon(1e-6));
        const double fd_hS = (nl.h(S + e, M) - nl.h(S - e, M)) / (2 * e);
        CHECK(nl.dh_dS(S, M) == doctest::Approx(fd_hS).epsilon(1e-6));
        const double fd_hM = (nl.h(S, M + e) - nl.h(S, M - e)) / (2 * e);
        CHECK(nl.dh_dM(S, M) == doctest::Approx(fd_hM).epsilon(1e-6));
        // dF/dM = f
        const double fd_F = (nl.F(M + e) - nl.F(M - e)) / (2 * e);
        CHECK(nl.f(M) == doctest::Approx(fd_F).epsilon(1e-6));
    }
}

TEST_CASE("Z: convex entropy with minimum 0 at MD") {
    ModelParams p = params_ab(2, 1);
    p.MD = 0.5;
    const Nonlinearity nl(p);
    CHECK(nl.Z(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    for (double M : {0.1, 0.9}) {
        const double oracle =
            integrate([&](double s) { return nl.F(s); }, 0.5, M) - nl.F(0.5) * (M - 0.5);
        CHECK(nl.Z(M) == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(nl.Z(M) >= 0.0);
    }
    // Z'(M) = F(M) - F(MD) by finite differences at M = 0.3
    const double e = 1e-6;
    const double fd = (nl.Z(0.3 + e) - nl.Z(0.3 - e)) / (2 * e);
    CHECK(fd == doctest::Approx(nl.F(0.3) - nl.F(0.5)).epsilon(1e-7));

    const Nonlinearity nq(params_ab(2, 1));  // MD = 0: Z undefined
    CHECK_THROWS_AS(nq.Z(0.3), std::domain_error);
}

TEST_CASE("Z_eps differs from Z by a constant plus the Boltzmann part") {
    ModelParams p = params_ab(2, 1);
    p.MD = 0.4;
    const Nonlinearity nl(p);
    const double eps = 1e-3;
    auto offset = [&](double M) {
        const double boltz = M * std::log(M / 0.4) + 0.4 - M;
        return nl.Z_eps(M, eps) - nl.Z(M) - eps * boltz;
    };
    CHECK(offset(0.2) == doctest::Approx(offset(0.7)).epsilon(1e-11));
    CHECK(offset(0.5) == doctest::Approx(nl.F_antiderivative(0.4)).epsilon(1e-10));
}

TEST_CASE("entropy variable: zero at MD, strictly increasing") {
    ModelParams p = params_ab(2, 1);
    p.MD = 0.5;
    const Nonlinearity nl(p);
    for (double eps : {1e-2, 1e-6}) CHECK(nl.entropy_variable(0.5, eps) == 0.0);
    CHECK(nl.entropy_variable(0.6, 1e-3) > nl.entropy_variable(0.4, 1e-3));
    const double W = nl.entropy_variable(0.9, 1e-6);
    CHECK(W == doctest::Approx(nl.F(0.9) - nl.F(0.5) + 1e-6 * std::log(1.8)).epsilon(1e-14));
    CHECK_THROWS_AS(nl.entropy_variable(0.0, 1e-6), std::domain_error);
    CHECK_THROWS_AS(nl.entropy_variable(1.0, 1e-6), std::domain_error);
}

TEST_CASE("entropy inverse: roundtrip and limits") {
    for (double MD : {0.1, 0.5}) {
        ModelParams p = params_ab(2, 1);
        p.MD = MD;
        const Nonlinearity nl(p);
        CHECK(nl.entropy_inverse(0.0, 1e-6) == doctest::Approx(MD).epsilon(1e-13));
        CHECK(nl.entropy_inverse(1e6, 1e-6) < 1.0);
        CHECK(nl.entropy_inverse(-1e6, 1e-6) > 0.0);
        for (double eps : {1e-2, 1e-6})
            for (int i = 0; i <= 60; ++i) {
                const double M = 1e-6 + (1.0 - 2e-6) * i / 60.0;
                const double back = nl.entropy_inverse(nl.entropy_variable(M, eps), eps);
                CHECK(std::abs(back - M) <= 1e-10);
            }
        CHECK_THROWS_AS(nl.entropy_inverse(std::nan(""), 1e-6), std::invalid_argument);
    }
}
