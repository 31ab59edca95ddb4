#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "torsionlab/continuum.hpp"
#include "torsionlab/laplacian.hpp"

namespace tl {

double renormalized_logdet(double logdet, int rank, double area, double perimeter, double zeta0, int n);

// Surface with either the trivial rank-r bundle or a U(1) bundle given by
// phases along the default cuts.
struct Setup {
    SurfaceSpec surface;
    int rank = 1;
    std::vector<double> phases;

    std::string label() const;
    bool twisted() const;
    int dim_h0() const;
};

struct SetupInvariants {
    GeometrySummary geometry;
    int rank = 1;
    int dim_h0 = 0;
    Rational zeta0;
};
SetupInvariants setup_invariants(const Setup& s);

struct LogDetPoint {
    int n = 0;
    double logdet = 0.0;  // log det' of the graph Laplacian, not rescaled
    int kernel = 0;
    std::string method;   // "closed-form" or "dense"
};
LogDetPoint setup_logdet(const Setup& s, int n);
// full closed-form spectrum, n^2-rescaled; only for grid surfaces
std::optional<HermitianSpectrum> setup_closed_spectrum(const Setup& s, int n);
// continuum log det' (with the right-angle correction on rectangles) when known
std::optional<double> setup_target(const Setup& s);

struct Extrapolation {
    double limit = 0.0;
    double error = 0.0;
    double gamma = 0.0;  // fitted decay exponent, 0 when no fit was possible
};
// x_k ~ L + c n_k^{-gamma} through the last three points
Extrapolation richardson(const std::vector<int>& n, const std::vector<double>& x);

struct RenormRow {
    int n = 0;
    double logdet = 0.0;
    double renormalized = 0.0;
};
struct RenormSeries {
    std::string label;
    std::vector<RenormRow> rows;
    Extrapolation extrapolated;
    std::optional<double> target;
    std::string csv() const;
};
// each n is an independent task; rows come back in n_list order for any thread count
RenormSeries convergence_study(const Setup& s, const std::vector<int>& n_list, int threads = 1);

struct RatioRow {
    int n = 0;
    double logdet_a = 0.0;
    double logdet_b = 0.0;
    double ratio = 0.0;
};
struct RatioSeries {
    std::vector<RatioRow> rows;
    std::optional<double> continuum_ratio;
    std::string csv() const;
};
RatioSeries ratio_study(const Setup& a, const Setup& b, const std::vector<int>& n_list, int threads = 1);

// renormalized log-dets of two surfaces sharing cone and non-right corner
// angles; the model-surface sequence CA_n cancels in the difference
struct DifferenceRow {
    int n = 0;
    double renorm_a = 0.0;
    double renorm_b = 0.0;
    double difference = 0.0;
};
std::vector<DifferenceRow> difference_series(const Setup& a, const Setup& b, const std::vector<int>& n_list);

struct WeylRow {
    int n = 0;
    double c_n = 0.0;  // min over nonzero lambda_i / i, i counted from 1 with the kernel
    int argmin = 0;
};
struct WeylResult {
    double c_min = 0.0;
    std::vector<WeylRow> table;
    std::string csv() const;
};
WeylResult uniform_weyl_check(const std::vector<HermitianSpectrum>& spectra);
// max over lo <= i <= hi of |lambda_i A / (4 pi i) - 1|
double weyl_slope_deviation(const HermitianSpectrum& s, double area, int lo, int hi);

// rho = t rho1 + (1 - t) rho2 on [-1, 1]
class BumpProfile {
public:
    double t = 0.0;
    double c = 0.0;                     // int_0^1 rho'^2
    std::array<double, 4> residuals{};  // symmetry, plateaus, reflection, int rho(1 - rho)
    double integral = 0.0;              // int_0^1 rho
    double integral_sq = 0.0;           // int_0^1 rho^2

    double value(double x) const;
    double derivative(double x) const;
    static double rho1(double x);
    static double rho2(double x);
    static double rho1_prime(double x);
    static double rho2_prime(double x);
    // pieces of rho on [0, 1] are polynomials between these points
    static const std::vector<double>& breakpoints();
};
BumpProfile build_bump();

struct EmbeddingResult {
    double norm_ratio = 1.0;
    double form_ratio = 1.0;
    double mu_norm2 = 0.0;
    double mu_energy = 0.0;
    double graph_norm2 = 0.0;
    double graph_form = 0.0;
};
// f is indexed by mesh vertex of discretize(surface, n); rectangle or torus only
EmbeddingResult embedding_check(const SurfaceSpec& surface, int n, const BumpProfile& rho, const std::vector<double>& f);
// vertices allowed in the support of f
std::vector<bool> interior_support(const SurfaceSpec& surface, int n);

}  // namespace tl
