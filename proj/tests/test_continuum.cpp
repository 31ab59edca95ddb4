#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "torsionlab/continuum.hpp"
#include "torsionlab/spectra.hpp"

using namespace tl;
using testing_helpers::code_of;

namespace {

using K = ContinuumKind;

double worst_residual(K kind, double a, double b) {
    double worst = 0;
    for (int i = 0; i <= 90; ++i) {
        double t = 0.02 + 0.002 * i;
        worst = std::max(worst, std::abs(heat_trace(kind, a, b, t) - heat_expansion(kind, a, b).evaluate(t)));
    }
    return worst;
}

}  // namespace

TEST_SUITE("continuum") {

TEST_CASE("explicit spectra") {
    auto r = continuum_spectrum(K::Rectangle, 1, 1, 20);
    REQUIRE(r.size() == 4);
    CHECK(r[0] == 0.0);
    CHECK(std::abs(r[1] - M_PI * M_PI) < 1e-12);
    CHECK(std::abs(r[2] - M_PI * M_PI) < 1e-12);
    CHECK(std::abs(r[3] - 2 * M_PI * M_PI) < 1e-12);

    auto t = continuum_spectrum(K::Torus, 1, 1, 40);
    REQUIRE(t.size() == 5);
    for (int i = 1; i < 5; ++i) CHECK(std::abs(t[i] - 4 * M_PI * M_PI) < 1e-12);

    auto c = continuum_spectrum(K::Cylinder, 1, 1, 30);
    // 0, pi^2 (k=1), 4pi^2 (k=2), 4pi^2 twice (m=+-1)
    REQUIRE(c.size() == 2);
    CHECK(std::abs(c[1] - M_PI * M_PI) < 1e-12);

    const double lambda = 1e4;
    double weyl = double(continuum_spectrum(K::Rectangle, 1, 2, lambda).size()) / (2.0 * lambda / (4 * M_PI));
    CHECK(std::abs(weyl - 1.0) < 0.05);
}

TEST_CASE("heat trace expansion") {
    CHECK(std::abs(heat_expansion(K::Rectangle, 1, 1).evaluate(0.1) - 1.93783677) < 1e-8);
    auto cyl = heat_expansion(K::Cylinder, 1, 1);
    CHECK(cyl.constant == 0.0);
    CHECK(std::abs(cyl.evaluate(0.05) - (1 / (4 * M_PI * 0.05) + 2.0 / (8 * std::sqrt(M_PI * 0.05)))) < 1e-12);
    // torus(1,1): trace - 1/(4 pi t) decays like e^{-1/(4t)}
    for (double t : {0.05, 0.02, 0.01})
        CHECK(std::abs(heat_trace(K::Torus, 1, 1, t) - 1 / (4 * M_PI * t)) < 3.0 / (M_PI * t) * std::exp(-1 / (4 * t)));

    for (double s : {2.0, 3.0}) CHECK(worst_residual(K::Rectangle, s, s) < 1e-5);
    CHECK(worst_residual(K::Rectangle, 2, 3) < 1e-5);
    for (double s : {4.0, 5.0}) {
        CHECK(worst_residual(K::Torus, s, s) < 1e-5);
        CHECK(worst_residual(K::Cylinder, s, s) < 1e-5);
    }
}

TEST_CASE("unit-size heat residual is the first Poisson image") {
    // Neumann side L contributes (L / sqrt(pi t)) e^{-L^2/t} times the other factor
    for (double t : {0.05, 0.1, 0.2}) {
        double resid = heat_trace(K::Rectangle, 1, 1, t) - heat_expansion(K::Rectangle, 1, 1).evaluate(t);
        double other = 0.5 + 1 / (2 * std::sqrt(M_PI * t));
        double predicted = 2.0 * (1 / std::sqrt(M_PI * t)) * std::exp(-1 / t) * other;
        CHECK(std::abs(resid - predicted) < 0.02 * predicted);
    }
    for (double t : {0.02, 0.05, 0.1}) {
        double resid = heat_trace(K::Torus, 1, 1, t) - heat_expansion(K::Torus, 1, 1).evaluate(t);
        double c = 1 / (2 * std::sqrt(M_PI * t));
        double predicted = 2.0 * c * (2.0 * c * std::exp(-1 / (4 * t)));
        CHECK(std::abs(resid - predicted) < 0.1 * predicted);
    }
}

TEST_CASE("heat expansion from angles") {
    auto gs = geometry_summary(build_surface(SurfaceSpec::rectangle(2, 3)));
    auto h = heat_expansion(gs);
    CHECK(h.area == 6);
    CHECK(h.perimeter == 10);
    CHECK(std::abs(h.constant - 0.25) < 1e-15);
    auto l = heat_expansion(geometry_summary(build_surface(SurfaceSpec::lshape())));
    CHECK(std::abs(l.constant - (1.0 + zeta_zero(geometry_summary(build_surface(SurfaceSpec::lshape())), 1, 1).value())) <
          1e-14);
}

TEST_CASE("zeta at zero") {
    auto summary = [](SurfaceSpec s) { return geometry_summary(build_surface(s)); };
    CHECK(zeta_zero(summary(SurfaceSpec::rectangle(1, 1)), 1, 1) == Rational(-3, 4));
    CHECK(zeta_zero(summary(SurfaceSpec::rectangle(3, 2)), 1, 1) == Rational(-3, 4));
    CHECK(zeta_zero(summary(SurfaceSpec::lshape()), 1, 1) == Rational(-13, 18));
    CHECK(zeta_zero(summary(SurfaceSpec::torus(1, 1)), 1, 1) == Rational(-1));
    CHECK(zeta_zero(summary(SurfaceSpec::cylinder(2, 1)), 1, 1) == Rational(-1));
    CHECK(zeta_zero(summary(SurfaceSpec::rectangle(1, 1)), 2, 2) == Rational(-3, 2));
    CHECK(zeta_zero(summary(SurfaceSpec::torus(1, 1)), 1, 0) == Rational(0));
    // cone of angle pi: (16 - 4)/8 = 3/2 from the cone, 2 corners of 3/4
    CHECK(zeta_zero(summary(SurfaceSpec::cone(1)), 1, 1) == Rational(-1) + Rational(1, 12) * Rational(3));
    CHECK(Rational(6, -8).str() == "-3/4");
    CHECK(std::abs(zeta_zero_mellin(K::Rectangle, 1, 1) + 0.75) < 1e-6);
}

TEST_CASE("dedekind eta") {
    CHECK(std::abs(dedekind_eta(std::exp(-2 * M_PI)) - std::tgamma(0.25) / (2 * std::pow(M_PI, 0.75))) < 1e-12);
    for (double q : {1e-3, 1e-6, 1e-9}) CHECK(std::abs(dedekind_eta(q) / std::pow(q, 1.0 / 24) - 1.0) < 2 * q);
    // q^{1/24} wins near 0: eta rises up to q ~ 0.04, then falls
    CHECK(dedekind_eta(0.01) < dedekind_eta(0.03));
    double prev = dedekind_eta(0.05);
    for (double q = 0.06; q <= 0.5; q += 0.01) {
        double v = dedekind_eta(q);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(code_of([] { dedekind_eta(0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([] { dedekind_eta(1.0); }) == ErrorCode::DomainError);
}

TEST_CASE("torus and rectangle torsion") {
    const double eta_i = std::tgamma(0.25) / (2 * std::pow(M_PI, 0.75));
    CHECK(std::abs(torus_torsion(1, 1) - 4 * std::log(eta_i)) < 1e-12);
    CHECK(std::abs(torus_torsion(1, 1) + 1.0546883) < 1e-7);
    CHECK(std::abs(torus_torsion(2, 2) - torus_torsion(1, 1) - 2 * std::log(2.0)) < 1e-12);
    CHECK(std::abs(torus_torsion(1, 2) - torus_torsion(2, 1)) < 1e-12);
    CHECK(std::abs(rescale_torsion(torus_torsion(1, 1), -1, 3) - torus_torsion(3, 3)) < 1e-12);

    CHECK(std::abs(rectangle_torsion(1, 1) - (std::log(eta_i) + 1.5 * std::log(2.0))) < 1e-12);
    CHECK(std::abs(rectangle_torsion(1, 1) - 0.77605) < 1e-5);
    CHECK(std::abs(rectangle_torsion(2, 2) - rectangle_torsion(1, 1) - 1.5 * std::log(2.0)) < 1e-12);
    CHECK(std::abs(rectangle_torsion(1, 3) - rectangle_torsion(3, 1)) < 1e-12);
    CHECK(std::abs(rescale_torsion(rectangle_torsion(1, 2), -0.75, 2) - rectangle_torsion(2, 4)) < 1e-12);
    CHECK(rescale_torsion(0.3, -0.75, 1) == 0.3);

    for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{3.0, 1.0}, std::pair{5.0, 2.0}}) {
        double lhs = (a / b) * std::pow(dedekind_eta(std::exp(-2 * M_PI * a / b)), 4);
        double rhs = (b / a) * std::pow(dedekind_eta(std::exp(-2 * M_PI * b / a)), 4);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("cylinder and twisted torus closed forms") {
    CHECK(std::abs(twisted_torus_torsion(1, 1, M_PI, M_PI) - std::log(2.0)) < 1e-12);
    CHECK(std::abs(twisted_torus_torsion(1, 1, 0, M_PI) - std::log(2.0) / 2) < 1e-12);
    CHECK(std::abs(twisted_torus_torsion(1, 1, M_PI, 0) - twisted_torus_torsion(1, 1, 0, M_PI)) < 1e-12);
    CHECK(std::abs(twisted_torus_torsion(2, 3, 0.4, 1.1) - twisted_torus_torsion(3, 2, 1.1, 0.4)) < 1e-12);
    CHECK(code_of([] { twisted_torus_torsion(1, 1, 0, 0); }) == ErrorCode::DomainError);

    // both against the renormalized discrete determinants at n = 256
    const int n = 256;
    const double g = 4 * catalan() / M_PI;
    auto c = cylinder_mesh_logdet(2, 1, n);
    double ren = c.logdet - g * 2 * n * n + log_silver() / 2 * 4 * n - 2 * std::log(double(n));
    CHECK(std::abs(ren - cylinder_torsion(2, 1)) < 1e-4);
    for (auto [al, be] : {std::pair{M_PI, M_PI}, std::pair{0.7, 0.0}, std::pair{1.9, -0.5}}) {
        auto t = torus_mesh_logdet(1, 2, n, al, be);
        CHECK(std::abs(t.logdet - g * 2 * n * n - twisted_torus_torsion(1, 2, al, be)) < 1e-4);
    }
}

}
