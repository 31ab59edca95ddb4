#include "torsionlab/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/LU>

#include "torsionlab/errors.hpp"

namespace tl {

void NeumaierSum::add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

Eigen::MatrixXcd assemble(const UnitaryConnection& c) {
    const auto& g = c.graph();
    const int r = c.rank();
    const int nv = g.vertex_count();
    if (static_cast<long>(r) * nv > kDenseBudget)
        throw Error(ErrorCode::BudgetExceeded, "dense assembly beyond r|V| = " + std::to_string(kDenseBudget));
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(r * nv, r * nv);
    for (int v = 0; v < nv; ++v)
        for (int d = 0; d < 4; ++d) {
            const auto& st = g.step(v, static_cast<Side>(d));
            if (st.target < 0) continue;
            a.block(r * v, r * v, r, r) += Eigen::MatrixXcd::Identity(r, r);
            // phi_{v' v} transports the fiber at v' back to v
            a.block(r * v, r * st.target, r, r) -= c.transport(v, static_cast<Side>(d)).adjoint();
        }
    return a;
}

Eigen::MatrixXd assemble_scalar(const MeshGraph& g) {
    const int nv = g.vertex_count();
    if (nv > kDenseBudget) throw Error(ErrorCode::BudgetExceeded, "dense assembly too large");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nv, nv);
    for (int v = 0; v < nv; ++v)
        for (int d = 0; d < 4; ++d) {
            const auto& st = g.step(v, static_cast<Side>(d));
            if (st.target < 0) continue;
            a(v, v) += 1.0;
            a(v, st.target) -= 1.0;
        }
    return a;
}

HermitianSpectrum make_spectrum(std::vector<double> values, double kernel_tol) {
    std::sort(values.begin(), values.end());
    HermitianSpectrum s;
    s.kernel_dim = static_cast<int>(std::count_if(values.begin(), values.end(), [&](double x) { return x < kernel_tol; }));
    s.eigenvalues = std::move(values);
    return s;
}

static HermitianSpectrum finish(std::vector<double> values, double kernel_tol, std::optional<int> expected) {
    HermitianSpectrum s = make_spectrum(std::move(values), kernel_tol);
    if (expected && *expected != s.kernel_dim)
        throw Error(ErrorCode::KernelMismatch, "kernel dimension " + std::to_string(s.kernel_dim) + ", expected " +
                                                   std::to_string(*expected));
    return s;
}

HermitianSpectrum spectrum(const Eigen::MatrixXd& a, double kernel_tol, std::optional<int> expected_kernel) {
    if (a.rows() > kDenseBudget) throw Error(ErrorCode::BudgetExceeded, "dense eigensolve too large");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return finish(std::move(v), kernel_tol, expected_kernel);
}

HermitianSpectrum spectrum(const Eigen::MatrixXcd& a, double kernel_tol, std::optional<int> expected_kernel) {
    if (a.rows() > kDenseBudget) throw Error(ErrorCode::BudgetExceeded, "dense eigensolve too large");
    if (a.size() == 0 || a.imag().cwiseAbs().maxCoeff() == 0.0) return spectrum(Eigen::MatrixXd(a.real()), kernel_tol, expected_kernel);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return finish(std::move(v), kernel_tol, expected_kernel);
}

HermitianSpectrum connection_spectrum(const UnitaryConnection& c, std::optional<int> expected_kernel,
                                      double kernel_tol) {
    HermitianSpectrum s = spectrum(assemble(c), kernel_tol, expected_kernel);
    s.n = c.graph().n();
    s.rank = c.rank();
    s.source = c.graph().surface().name();
    return s;
}

HermitianSpectrum rescale_spectrum(const HermitianSpectrum& s, int n) {
    HermitianSpectrum out = s;
    const double f = static_cast<double>(n) * n;
    for (double& x : out.eigenvalues) x *= f;
    out.rescaled = true;
    out.n = n;
    return out;
}

double determinant_extended(const UnitaryConnection& c) {
    using CL = std::complex<long double>;
    Eigen::Matrix<CL, Eigen::Dynamic, Eigen::Dynamic> a = assemble(c).cast<CL>();
    return double(a.partialPivLu().determinant().real());
}

double log_det_prime(const HermitianSpectrum& s) {
    if (s.eigenvalues.empty()) throw Error(ErrorCode::EmptySpectrum, "no eigenvalues");
    // largest terms first
    NeumaierSum acc;
    for (size_t i = s.eigenvalues.size(); i-- > static_cast<size_t>(s.kernel_dim);) acc.add(std::log(s.eigenvalues[i]));
    return acc.value();
}

std::complex<double> discrete_zeta(const HermitianSpectrum& s, std::complex<double> z) {
    std::complex<double> total = 0.0;
    for (size_t i = s.kernel_dim; i < s.eigenvalues.size(); ++i) total += std::exp(-z * std::log(s.eigenvalues[i]));
    return total;
}

std::string spectrum_csv(const HermitianSpectrum& s) {
    std::ostringstream os;
    os << "index,eigenvalue\n";
    char buf[64];
    for (size_t i = 0; i < s.eigenvalues.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", s.eigenvalues[i]);
        os << i << "," << buf << "\n";
    }
    return os.str();
}

}  // namespace tl
