#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "torsionlab/connection.hpp"

namespace tl {

struct HermitianSpectrum {
    std::vector<double> eigenvalues;  // non-decreasing
    int kernel_dim = 0;
    bool rescaled = false;  // values are n^2 * lambda
    int n = 1;
    int rank = 1;
    std::string source;
};

constexpr double kDefaultKernelTol = 1e-8;
constexpr int kDenseBudget = 6000;

// Dense twisted Laplacian. Block (v, v') collects -phi_{v' v}; the diagonal
// block of v is deg(v) I.
Eigen::MatrixXcd assemble(const UnitaryConnection& c);
// untwisted scalar Laplacian of the graph
Eigen::MatrixXd assemble_scalar(const MeshGraph& g);

// Eigenvalues of a Hermitian matrix. The kernel is everything below
// kernel_tol; when expected_kernel is given a mismatch throws KernelMismatch.
HermitianSpectrum spectrum(const Eigen::MatrixXcd& a, double kernel_tol = kDefaultKernelTol,
                           std::optional<int> expected_kernel = std::nullopt);
HermitianSpectrum spectrum(const Eigen::MatrixXd& a, double kernel_tol = kDefaultKernelTol,
                           std::optional<int> expected_kernel = std::nullopt);
// assemble + eigensolve, checking the kernel against flat sections
HermitianSpectrum connection_spectrum(const UnitaryConnection& c, std::optional<int> expected_kernel,
                                      double kernel_tol = kDefaultKernelTol);

HermitianSpectrum rescale_spectrum(const HermitianSpectrum& s, int n);
HermitianSpectrum make_spectrum(std::vector<double> values, double kernel_tol = kDefaultKernelTol);

double log_det_prime(const HermitianSpectrum& s);
// full determinant by LU in long double; keeps its relative accuracy when the
// smallest eigenvalue is tiny, where the eigenvalue product does not
double determinant_extended(const UnitaryConnection& c);
std::complex<double> discrete_zeta(const HermitianSpectrum& s, std::complex<double> z);

std::string spectrum_csv(const HermitianSpectrum& s);

// compensated summation used for all long sums of logarithms
class NeumaierSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace tl
