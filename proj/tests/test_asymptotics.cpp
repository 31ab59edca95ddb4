#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "torsionlab/asymptotics.hpp"
#include "torsionlab/spectra.hpp"

using namespace tl;
using testing_helpers::code_of;

namespace {

Setup plain(SurfaceSpec s, int rank = 1) { return Setup{s, rank, {}}; }

SurfaceSpec l_tromino() {
    SurfaceSpec s;
    s.kind = SurfaceSpec::Kind::Raw;
    s.tiles = 3;
    s.pairings = {{0, E, 1, W, {}}, {0, N, 2, S, {}}};
    return s;
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("renormalization subtracts area and perimeter terms") {
    const double g4 = 4.0 * catalan() / M_PI;
    CHECK(renormalized_logdet(0.0, 1, 1.0, 0.0, 0.0, 1) == doctest::Approx(-g4).epsilon(1e-15));
    // perimeter term enters with log(sqrt 2 - 1)/2 < 0, so it is added back
    double r = renormalized_logdet(10.0, 2, 0.0, 3.0, -0.5, 4);
    CHECK(r == doctest::Approx(10.0 + 0.5 * std::log(1 + std::sqrt(2.0)) * 2 * 3 * 4 - std::log(4.0)).epsilon(1e-14));
    CHECK(code_of([] { renormalized_logdet(1, 1, 1, 1, 0, 0); }) == ErrorCode::DomainError);
}

TEST_CASE("closed form and dense log-dets agree") {
    for (auto s : {Setup{SurfaceSpec::rectangle(2, 1)}, Setup{SurfaceSpec::torus(2, 2)},
                   Setup{SurfaceSpec::cylinder(3, 1)}, Setup{SurfaceSpec::torus(1, 2), 1, {0.4, 2.0}}}) {
        for (int n : {2, 3}) {
            auto p = setup_logdet(s, n);
            CHECK(p.method == "closed-form");
            auto sp = setup_closed_spectrum(s, n);
            REQUIRE(sp);
            long nz = long(sp->eigenvalues.size()) - sp->kernel_dim;
            CHECK(p.logdet == doctest::Approx(log_det_prime(*sp) - 2.0 * nz * std::log(double(n))).epsilon(1e-11));
            CHECK(p.kernel == sp->kernel_dim);
        }
    }
    auto l = setup_logdet(plain(SurfaceSpec::lshape()), 2);
    CHECK(l.method == "dense");
    CHECK(l.kernel == 1);
    CHECK(code_of([] { setup_logdet(plain(SurfaceSpec::lshape(), 2), 23); }) == ErrorCode::BudgetExceeded);
}

TEST_CASE("setup validation") {
    CHECK(code_of([] { setup_logdet(Setup{SurfaceSpec::rectangle(1, 1), 1, {0.3}}, 2); }) == ErrorCode::BadCuts);
    CHECK(code_of([] { setup_logdet(Setup{SurfaceSpec::torus(1, 1), 1, {0.3}}, 2); }) == ErrorCode::BadCuts);
    CHECK(code_of([] { setup_logdet(Setup{SurfaceSpec::torus(1, 1), 2, {0.3, 0.1}}, 2); }) ==
          ErrorCode::RankUnsupported);
    Setup untwisted{SurfaceSpec::torus(1, 1), 1, {0.0, 2 * M_PI}};
    CHECK_FALSE(untwisted.twisted());
    CHECK(untwisted.dim_h0() == 1);
    CHECK(setup_invariants(untwisted).zeta0 == Rational{-1, 1});
}

TEST_CASE("trivial rank r multiplies the scalar log-det") {
    for (auto spec : {SurfaceSpec::torus(1, 1), SurfaceSpec::lshape()}) {
        auto one = setup_logdet(plain(spec), 2), two = setup_logdet(plain(spec, 2), 2);
        CHECK(two.logdet == doctest::Approx(2 * one.logdet).epsilon(1e-14));
        CHECK(two.kernel == 2 * one.kernel);
        auto s1 = convergence_study(plain(spec), {2, 3}), s2 = convergence_study(plain(spec, 2), {2, 3});
        for (size_t i = 0; i < 2; ++i)
            CHECK(s2.rows[i].renormalized == doctest::Approx(2 * s1.rows[i].renormalized).epsilon(1e-12));
    }
}

TEST_CASE("thread count does not change results") {
    Setup s{SurfaceSpec::torus(2, 1), 1, {0.5, 1.0}};
    std::vector<int> ns{3, 5, 8, 13, 21};
    auto one = convergence_study(s, ns, 1), four = convergence_study(s, ns, 4);
    CHECK(one.csv() == four.csv());
    auto r1 = ratio_study(s, Setup{SurfaceSpec::torus(2, 1), 1, {1.0, 0.5}}, ns, 1);
    auto r3 = ratio_study(s, Setup{SurfaceSpec::torus(2, 1), 1, {1.0, 0.5}}, ns, 3);
    CHECK(r1.csv() == r3.csv());
    CHECK(code_of([] { convergence_study(plain(SurfaceSpec::lshape(), 2), {2, 23}, 2); }) ==
          ErrorCode::BudgetExceeded);
}

TEST_CASE("richardson recovers a power law") {
    std::vector<int> n{8, 16, 32};
    std::vector<double> x;
    for (int k : n) x.push_back(1.5 + 3.0 * std::pow(k, -2.0));
    auto e = richardson(n, x);
    CHECK(e.limit == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(e.gamma == doctest::Approx(2.0).epsilon(1e-8));
    // oscillating tail: no fit
    auto f = richardson({1, 2, 3}, {1.0, 2.0, 1.5});
    CHECK(f.gamma == 0.0);
    CHECK(f.limit == 1.5);
    CHECK(code_of([] { richardson({1, 2}, {1.0}); }) == ErrorCode::DomainError);
}

TEST_CASE("torus and rectangle converge to their torsions") {
    auto t = convergence_study(plain(SurfaceSpec::torus(1, 1)), {16, 32, 64, 128});
    REQUIRE(t.target);
    CHECK(*t.target == doctest::Approx(-1.0546882810).epsilon(1e-9));
    CHECK(std::abs(t.rows.back().renormalized - *t.target) < 1e-4);
    CHECK(std::abs(t.extrapolated.limit - *t.target) < 1e-6);
    CHECK(t.extrapolated.gamma == doctest::Approx(2.0).epsilon(0.05));

    auto r = convergence_study(plain(SurfaceSpec::rectangle(1, 1)), {16, 32, 64, 128});
    REQUIRE(r.target);
    CHECK(*r.target == doctest::Approx(0.6027619055).epsilon(1e-9));
    CHECK(std::abs(r.rows.back().renormalized - *r.target) < 1e-5);
    CHECK(std::abs(r.extrapolated.limit - *r.target) < 1e-7);

    auto csv = t.csv();
    CHECK(csv.rfind("n,logdet,renormalized,extrapolated_limit,target,abs_error\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("twisted torus series is Cauchy and lands on log 2") {
    auto s = convergence_study(Setup{SurfaceSpec::torus(1, 1), 1, {M_PI, M_PI}}, {8, 16, 32, 64, 128, 256});
    REQUIRE(s.target);
    CHECK(*s.target == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    for (size_t i = 2; i < s.rows.size(); ++i) {
        double d1 = std::abs(s.rows[i].renormalized - s.rows[i - 1].renormalized);
        double d0 = std::abs(s.rows[i - 1].renormalized - s.rows[i - 2].renormalized);
        CHECK(d1 < 0.3 * d0);
    }
    // error ~ 0.75 / n^2
    CHECK(std::abs(s.rows.back().renormalized - *s.target) < 2e-5);
}

TEST_CASE("ratio study") {
    auto same = ratio_study(plain(SurfaceSpec::torus(2, 1)), plain(SurfaceSpec::torus(2, 1)), {2, 4, 8});
    for (const auto& r : same.rows) CHECK(r.ratio == 1.0);
    // a x b and b x a are the same surface rotated
    auto sym = ratio_study(plain(SurfaceSpec::rectangle(3, 1)), plain(SurfaceSpec::rectangle(1, 3)), {2, 5, 9});
    for (const auto& r : sym.rows) CHECK(std::abs(r.ratio - 1.0) < 1e-12);
    // torus(2,2) vs torus(4,1): same area, no boundary
    auto tt = ratio_study(plain(SurfaceSpec::torus(2, 2)), plain(SurfaceSpec::torus(4, 1)), {8, 16, 32, 64});
    REQUIRE(tt.continuum_ratio);
    CHECK(*tt.continuum_ratio ==
          doctest::Approx(std::exp(torus_torsion(2, 2) - torus_torsion(4, 1))).epsilon(1e-12));
    double prev = INFINITY;
    for (const auto& r : tt.rows) {
        double err = std::abs(r.ratio - *tt.continuum_ratio);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-3 * *tt.continuum_ratio);
    CHECK(code_of([] { ratio_study(plain(SurfaceSpec::torus(1, 1)), plain(SurfaceSpec::torus(2, 1)), {2}); }) ==
          ErrorCode::HypothesisViolation);
    CHECK(code_of([] { ratio_study(plain(SurfaceSpec::torus(2, 1)), plain(SurfaceSpec::cylinder(2, 1)), {2}); }) ==
          ErrorCode::HypothesisViolation);
    CHECK(code_of([] { ratio_study(plain(SurfaceSpec::torus(2, 1)), plain(SurfaceSpec::torus(2, 1)), {4, 2}); }) ==
          ErrorCode::DomainError);
}

TEST_CASE("difference of L-shapes settles") {
    auto big = plain(SurfaceSpec::lshape()), small = plain(l_tromino());
    auto ig = setup_invariants(big), is = setup_invariants(small);
    CHECK(ig.geometry.nonright_quarters == is.geometry.nonright_quarters);
    CHECK(ig.zeta0 == is.zeta0);
    auto rows = difference_series(big, small, {1, 2, 4, 8});
    for (const auto& r : rows) CHECK(r.difference == doctest::Approx(r.renorm_a - r.renorm_b));
    double d1 = std::abs(rows[3].difference - rows[2].difference);
    double d0 = std::abs(rows[2].difference - rows[1].difference);
    CHECK(d1 < d0);
    CHECK(code_of([] { difference_series(plain(SurfaceSpec::lshape()), plain(SurfaceSpec::cone(1)), {2}); }) ==
          ErrorCode::HypothesisViolation);
}

TEST_CASE("uniform Weyl bound") {
    std::vector<HermitianSpectrum> specs;
    for (int n : {2, 4, 8, 16}) specs.push_back(*setup_closed_spectrum(plain(SurfaceSpec::rectangle(2, 1)), n));
    auto w = uniform_weyl_check(specs);
    CHECK(w.c_min > 0.0);
    CHECK(w.table.size() == 4);
    for (const auto& row : w.table) CHECK(row.c_n >= w.c_min);
    // first nonzero Neumann eigenvalue of the 2x1 rectangle is pi^2/4, at 1-based index 2
    CHECK(w.table.back().argmin >= 2);

    auto single = uniform_weyl_check({specs[0]});
    CHECK(single.c_min == single.table[0].c_n);

    HermitianSpectrum raw = make_spectrum({0.0, 1.0, 2.0});
    CHECK(code_of([&] { uniform_weyl_check({raw}); }) == ErrorCode::DomainError);
    CHECK(code_of([] { uniform_weyl_check({}); }) == ErrorCode::EmptySpectrum);

    auto torus = *setup_closed_spectrum(plain(SurfaceSpec::torus(1, 1)), 64);
    CHECK(weyl_slope_deviation(torus, 1.0, 200, 400) < 0.1);
    CHECK(code_of([&] { weyl_slope_deviation(torus, 1.0, 1, 5000); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("bump profile") {
    auto p = build_bump();
    CHECK(p.t > 0.0);
    CHECK(p.t < 1.0);
    for (double r : p.residuals) CHECK(r < 1e-10);
    CHECK(p.integral == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.integral_sq == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(p.value(0.0) == 1.0);
    CHECK(p.value(1.0) == 0.0);
    CHECK(p.value(-0.3) == p.value(0.3));
    CHECK(p.c > 0.0);

    // derivatives against central differences away from breakpoints
    for (double x : {0.2, 0.3, 0.4, 0.6, 0.7, 0.8, -0.45}) {
        double h = 1e-6;
        double fd = (p.value(x + h) - p.value(x - h)) / (2 * h);
        CHECK(p.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
    }
    // C^1 at every breakpoint
    for (double b : BumpProfile::breakpoints()) {
        double e = 1e-9;
        CHECK(std::abs(p.value(b + e) - p.value(b - e)) < 1e-7);
        CHECK(std::abs(p.derivative(b + e) - p.derivative(b - e)) < 1e-6);
    }
    // with a mixing value where int rho(1 - rho) is not zero, int rho^2 moves off 1/2
    double off = 0.0;
    for (int i = 0; i < 2000; ++i) {
        double x = (i + 0.5) / 2000, r = BumpProfile::rho1(x);
        off += r * r / 2000;
    }
    CHECK(std::abs(off - 0.5) > 1e-3);
}

TEST_CASE("embedding: single vertices") {
    auto rho = build_bump();
    for (auto spec : {SurfaceSpec::torus(2, 2), SurfaceSpec::rectangle(2, 2)}) {
        const int n = 3;
        auto ok = interior_support(spec, n);
        for (size_t v = 0; v < ok.size(); ++v) {
            if (!ok[v]) continue;
            std::vector<double> f(ok.size(), 0.0);
            f[v] = 1.0;
            auto e = embedding_check(spec, n, rho, f);
            CHECK(e.norm_ratio == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(e.form_ratio == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("embedding: random sections") {
    auto rho = build_bump();
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    int checked = 0;
    for (auto spec : {SurfaceSpec::torus(2, 1), SurfaceSpec::rectangle(2, 2), SurfaceSpec::torus(1, 1)}) {
        for (int n : {2, 3, 4}) {
            auto ok = interior_support(spec, n);
            for (int rep = 0; rep < 12; ++rep) {
                std::vector<double> f(ok.size(), 0.0);
                for (size_t v = 0; v < ok.size(); ++v)
                    if (ok[v]) f[v] = gauss(rng);
                auto e = embedding_check(spec, n, rho, f);
                CHECK(e.norm_ratio == doctest::Approx(1.0).epsilon(1e-10));
                CHECK(e.form_ratio == doctest::Approx(1.0).epsilon(1e-10));
                ++checked;
            }
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("embedding: zero section and support violations") {
    auto rho = build_bump();
    auto spec = SurfaceSpec::rectangle(2, 2);
    auto ok = interior_support(spec, 2);
    auto z = embedding_check(spec, 2, rho, std::vector<double>(ok.size(), 0.0));
    CHECK(z.norm_ratio == 1.0);
    CHECK(z.form_ratio == 1.0);
    int corner = -1;
    for (size_t v = 0; v < ok.size(); ++v)
        if (!ok[v]) corner = int(v);
    REQUIRE(corner >= 0);
    std::vector<double> f(ok.size(), 0.0);
    f[corner] = 1.0;
    CHECK(code_of([&] { embedding_check(spec, 2, rho, f); }) == ErrorCode::SupportViolation);
    CHECK(code_of([&] { embedding_check(spec, 2, rho, {1.0}); }) == ErrorCode::DomainError);
    CHECK(code_of([] { interior_support(SurfaceSpec::lshape(), 2); }) == ErrorCode::DomainError);
}

}
