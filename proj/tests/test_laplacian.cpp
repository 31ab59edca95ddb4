#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "torsionlab/laplacian.hpp"

using namespace tl;
using testing_helpers::code_of;
using testing_helpers::cycle_graph;
using testing_helpers::mesh;

TEST_SUITE("laplacian") {

TEST_CASE("2x2 grid matrix") {
    auto g = mesh(SurfaceSpec::rectangle(2, 2), 1);
    auto a = assemble(trivial_connection(g, 1));
    Eigen::MatrixXd expected(4, 4);
    // ids: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1)
    expected << 2, -1, -1, 0, -1, 2, 0, -1, -1, 0, 2, -1, 0, -1, -1, 2;
    CHECK((a.real() - expected).norm() == 0.0);
    CHECK(a.imag().norm() == 0.0);
    auto s = spectrum(a);
    std::vector<double> want{0, 2, 2, 4};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s.eigenvalues[i] - want[i]) < 1e-12);
    CHECK(s.kernel_dim == 1);
    CHECK(std::abs(log_det_prime(s) - std::log(16.0)) < 1e-12);
}

TEST_CASE("path on two vertices") {
    auto s = spectrum(assemble(trivial_connection(mesh(SurfaceSpec::rectangle(2, 1), 1), 1)));
    CHECK(std::abs(s.eigenvalues[0]) < 1e-14);
    CHECK(std::abs(s.eigenvalues[1] - 2.0) < 1e-14);
}

TEST_CASE("twisted triangle") {
    auto spec = SurfaceSpec::cylinder(3, 1);
    auto g = cycle_graph(3);
    auto c = connection_from_holonomy(g, HolonomyRepresentation{1, {phase(M_PI)}}, default_cuts(spec));
    auto a = assemble(c);
    CHECK(std::abs(a.determinant() - 4.0) < 1e-12);
    auto s = connection_spectrum(c, 0);
    CHECK(std::abs(log_det_prime(s) - std::log(4.0)) < 1e-12);
}

TEST_CASE("loops") {
    // single vertex with a loop of transport w: 2 - w - 1/w
    auto spec = SurfaceSpec::cylinder(1, 1);
    auto g = mesh(spec, 1);
    const double t = 0.8;
    auto c = connection_from_holonomy(g, HolonomyRepresentation{1, {phase(t)}}, default_cuts(spec));
    auto a = assemble(c);
    CHECK(std::abs(a(0, 0) - (2.0 - 2.0 * std::cos(t))) < 1e-14);
    // the trivial loop contributes nothing
    CHECK(std::abs(assemble(trivial_connection(g, 1))(0, 0)) == 0.0);
}

TEST_CASE("hermitian, PSD and bounded for flat SU(2)") {
    std::mt19937_64 rng(4);
    auto spec = SurfaceSpec::torus(2, 2);
    auto g = mesh(spec, 2);
    for (int trial = 0; trial < 5; ++trial) {
        auto [a, b] = random_commuting_su2(rng);
        auto c = connection_from_holonomy(g, HolonomyRepresentation{2, {a, b}}, default_cuts(spec));
        auto m = assemble(c);
        CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
        auto s = connection_spectrum(c, std::nullopt);
        CHECK(s.eigenvalues.front() > -1e-10);
        CHECK(s.eigenvalues.back() <= 8 * 2 + 1e-10);
        CHECK(int(s.eigenvalues.size()) == 2 * g->vertex_count());
    }
    for (auto sp : {SurfaceSpec::cone(1), SurfaceSpec::cone(3), SurfaceSpec::lshape(), SurfaceSpec::slit()}) {
        auto s = connection_spectrum(trivial_connection(mesh(sp, 2), 1), 1);
        CHECK(s.eigenvalues.front() > -1e-10);
        CHECK(s.eigenvalues.back() <= 8.0 + 1e-10);
    }
}

TEST_CASE("kernel mismatch is an error") {
    auto c = trivial_connection(mesh(SurfaceSpec::torus(2, 2), 2), 1);
    CHECK(code_of([&] { connection_spectrum(c, 0); }) == ErrorCode::KernelMismatch);
    CHECK(code_of([] { log_det_prime(HermitianSpectrum{}); }) == ErrorCode::EmptySpectrum);
}

TEST_CASE("disjoint union is additive") {
    auto s1 = connection_spectrum(trivial_connection(mesh(SurfaceSpec::rectangle(2, 3), 1), 1), 1);
    auto s2 = connection_spectrum(trivial_connection(mesh(SurfaceSpec::torus(3, 2), 1), 1), 1);
    std::vector<double> all = s1.eigenvalues;
    all.insert(all.end(), s2.eigenvalues.begin(), s2.eigenvalues.end());
    auto u = make_spectrum(all);
    CHECK(u.kernel_dim == 2);
    CHECK(std::abs(log_det_prime(u) - log_det_prime(s1) - log_det_prime(s2)) < 1e-12);
}

TEST_CASE("discrete zeta") {
    auto s = rescale_spectrum(connection_spectrum(trivial_connection(mesh(SurfaceSpec::lshape(), 2), 1), 1), 2);
    auto z0 = discrete_zeta(s, 0.0);
    CHECK(std::abs(z0 - double(s.eigenvalues.size() - s.kernel_dim)) < 1e-12);
    const double h = 1e-5;
    double deriv = -(discrete_zeta(s, h).real() - discrete_zeta(s, -h).real()) / (2 * h);
    CHECK(std::abs(deriv - log_det_prime(s)) < 1e-8 * std::max(1.0, std::abs(log_det_prime(s))));
}

TEST_CASE("spectrum csv") {
    auto s = make_spectrum({0.0, 2.0});
    CHECK(spectrum_csv(s) == "index,eigenvalue\n0,0\n1,2\n");
}

}
