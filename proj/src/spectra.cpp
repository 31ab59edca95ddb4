#include "torsionlab/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "torsionlab/continuum.hpp"
#include "torsionlab/errors.hpp"

namespace tl {

namespace {

constexpr double kPi = M_PI;

std::optional<double> g_catalan_override;

double computed_catalan() {
    // sum_{k>=0} (-1)^k / (2k+1)^2, Cohen-Villegas-Zagier with 30 terms
    const int n = 30;
    double d = std::pow(3.0 + std::sqrt(8.0), n);
    d = (d + 1.0 / d) / 2.0;
    double b = -1.0, c = -d, s = 0.0;
    for (int k = 0; k < n; ++k) {
        c = b - c;
        s += c / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0));
    }
    return s / d;
}

void check_index(int a, int b, int n, int i, int j) {
    if (a < 1 || b < 1 || n < 1) throw Error(ErrorCode::DomainError, "grid sizes must be positive");
    if (i < 0 || i >= a * n || j < 0 || j >= b * n)
        throw Error(ErrorCode::IndexOutOfRange, "mode (" + std::to_string(i) + "," + std::to_string(j) + ") outside grid");
}

double wrap_phase(double x) {
    double r = std::fmod(x, 2.0 * kPi);
    return r < 0 ? r + 2.0 * kPi : r;
}

HermitianSpectrum finish(std::vector<double> values, int n) {
    HermitianSpectrum s = make_spectrum(std::move(values));
    s.rescaled = true;
    s.n = n;
    s.source = "closed-form";
    return s;
}

// log prod_{j<M} (2 cosh(M theta) - 2 cos((2 pi j + beta)/M)) with 2 cosh theta = 2 + mu
double log_periodic_product(int m, double half_sin, double beta) {
    const double theta = 2.0 * std::asinh(half_sin);
    const double mt = m * theta;
    const double sb = std::sin(beta / 2.0);
    if (mt < 2.0) {
        double sh = std::sinh(mt / 2.0);
        return std::log(4.0 * sh * sh + 4.0 * sb * sb);
    }
    double e = std::exp(-mt);
    return mt + std::log1p(e * (e - 2.0 * std::cos(beta)));
}

void check_support(const FourierProfile& p, int n) {
    if (p.max_index() >= std::min(p.a * n, p.b * n))
        throw Error(ErrorCode::SupportTooWide, "profile modes reach the grid size");
}

}  // namespace

double catalan() { return g_catalan_override ? *g_catalan_override : computed_catalan(); }

CatalanOverride::CatalanOverride(double value) : saved_(g_catalan_override) { g_catalan_override = value; }
CatalanOverride::~CatalanOverride() { g_catalan_override = saved_; }

double mesh_eigenvalue(int a, int b, int n, int i, int j) {
    check_index(a, b, n, i, j);
    double sx = std::sin(kPi * i / (2.0 * a * n)), sy = std::sin(kPi * j / (2.0 * b * n));
    return 4.0 * double(n) * n * (sx * sx + sy * sy);
}

double mesh_eigenvector(int a, int b, int n, int i, int j, int k, int l) {
    check_index(a, b, n, i, j);
    check_index(a, b, n, k, l);
    return std::cos(kPi * i * (0.5 + k) / (a * n)) * std::cos(kPi * j * (0.5 + l) / (b * n));
}

double mesh_eigenvector_norm2(int a, int b, int n, int i, int j) {
    check_index(a, b, n, i, j);
    return double(a) * b * n * n / double(1 << ((i != 0) + (j != 0)));
}

HermitianSpectrum rectangle_mesh_spectrum(int a, int b, int n) {
    std::vector<double> v;
    v.reserve(size_t(a) * b * n * n);
    for (int i = 0; i < a * n; ++i)
        for (int j = 0; j < b * n; ++j) v.push_back(mesh_eigenvalue(a, b, n, i, j));
    return finish(std::move(v), n);
}

HermitianSpectrum torus_mesh_spectrum(int a, int b, int n, double alpha, double beta) {
    const int nx = a * n, ny = b * n;
    std::vector<double> v;
    v.reserve(size_t(nx) * ny);
    for (int i = 0; i < nx; ++i) {
        double sx = std::sin((2.0 * kPi * i + alpha) / (2.0 * nx));
        for (int j = 0; j < ny; ++j) {
            double sy = std::sin((2.0 * kPi * j + beta) / (2.0 * ny));
            v.push_back(4.0 * double(n) * n * (sx * sx + sy * sy));
        }
    }
    return finish(std::move(v), n);
}

HermitianSpectrum cylinder_mesh_spectrum(int a, int b, int n, double alpha) {
    const int nx = a * n, ny = b * n;
    std::vector<double> v;
    v.reserve(size_t(nx) * ny);
    for (int i = 0; i < nx; ++i) {
        double sx = std::sin((2.0 * kPi * i + alpha) / (2.0 * nx));
        for (int j = 0; j < ny; ++j) {
            double sy = std::sin(kPi * j / (2.0 * ny));
            v.push_back(4.0 * double(n) * n * (sx * sx + sy * sy));
        }
    }
    return finish(std::move(v), n);
}

double log_sin_product(int m, double x) {
    if (m < 1) throw Error(ErrorCode::DomainError, "sin product needs m >= 1");
    x = std::abs(x);
    if (x == 0.0) throw Error(ErrorCode::DomainError, "log of a vanishing product");
    // (sqrt(1+x^2) +- x)^{2m} = e^{+-2mu}; the bracket product is 2 sinh(2mu)
    const double y = 2.0 * m * std::asinh(x);
    return std::log(x) - 0.5 * std::log1p(x * x) + y + std::log(-std::expm1(-2.0 * y)) - m * std::log(4.0);
}

double sin_product(int m, double x) {
    if (m < 1) throw Error(ErrorCode::DomainError, "sin product needs m >= 1");
    return x == 0.0 ? 0.0 : std::exp(log_sin_product(m, x));
}

double sin_product_printed(int m, double x) {
    const double r = std::sqrt(1.0 + x * x);
    return std::abs(x) / r / std::pow(4.0, m) * std::abs(std::pow(r + x, 2 * m) - 1.0) *
           std::abs(std::pow(r - x, 2 * m) - 1.0);
}

double sin_product_direct(int m, double x) {
    double p = 1.0;
    for (int j = 0; j < m; ++j) {
        double s = std::sin(kPi * j / (2.0 * m));
        p *= s * s + x * x;
    }
    return p;
}

MeshLogDet rectangle_mesh_logdet(int a, int b, int n) {
    const int nx = a * n, ny = b * n;
    NeumaierSum sum;
    // i = 0: prod_{j >= 1} 4 sin^2(pi j / 2M) = M
    sum.add(std::log(double(ny)));
    for (int i = 1; i < nx; ++i) {
        sum.add(ny * std::log(4.0));
        sum.add(log_sin_product(ny, std::sin(kPi * i / (2.0 * nx))));
    }
    return {sum.value(), 1, long(nx) * ny};
}

MeshLogDet torus_mesh_logdet(int a, int b, int n, double alpha, double beta) {
    const int nx = a * n, ny = b * n;
    alpha = wrap_phase(alpha);
    beta = wrap_phase(beta);
    NeumaierSum sum;
    int kernel = 0;
    for (int i = 0; i < nx; ++i) {
        if (i == 0 && alpha == 0.0) {
            if (beta == 0.0) {
                sum.add(2.0 * std::log(double(ny)));  // prod_{j>=1} (2 - 2 cos(2 pi j / M)) = M^2
                kernel = 1;
            } else {
                double sb = std::sin(beta / 2.0);
                sum.add(std::log(4.0 * sb * sb));
            }
            continue;
        }
        sum.add(log_periodic_product(ny, std::abs(std::sin((2.0 * kPi * i + alpha) / (2.0 * nx))), beta));
    }
    return {sum.value(), kernel, long(nx) * ny};
}

MeshLogDet cylinder_mesh_logdet(int a, int b, int n, double alpha) {
    const int nx = a * n, ny = b * n;
    alpha = wrap_phase(alpha);
    NeumaierSum sum;
    int kernel = 0;
    for (int i = 0; i < nx; ++i) {
        if (i == 0 && alpha == 0.0) {
            sum.add(std::log(double(ny)));
            kernel = 1;
            continue;
        }
        sum.add(ny * std::log(4.0));
        sum.add(log_sin_product(ny, std::sin((2.0 * kPi * i + alpha) / (2.0 * nx))));
    }
    return {sum.value(), kernel, long(nx) * ny};
}

double FourierProfile::operator()(double x, double y) const {
    double v = 0.0;
    for (const auto& [ij, c] : coeffs)
        v += c * std::cos(2.0 * kPi * ij.first * x / a) * std::cos(2.0 * kPi * ij.second * y / b);
    return v;
}

int FourierProfile::max_index() const {
    int m = 0;
    for (const auto& [ij, c] : coeffs) m = std::max({m, ij.first, ij.second});
    return m;
}

double FourierProfile::coeff(int i, int j) const {
    auto it = coeffs.find({i, j});
    return it == coeffs.end() ? 0.0 : it->second;
}

double szego_trace_direct(const FourierProfile& p, int n) {
    check_support(p, n);
    const int nx = p.a * n, ny = p.b * n;
    auto lg = [&](int i, int j) { return std::log(mesh_eigenvalue(p.a, p.b, n, i, j)); };
    NeumaierSum total;
    for (const auto& [ij, c] : p.coeffs) {
        const auto [i, j] = ij;
        NeumaierSum t;
        if (i == 0 && j == 0) {
            for (int k = 0; k < nx; ++k)
                for (int l = 0; l < ny; ++l)
                    if (k || l) t.add(lg(k, l));
        } else if (j == 0) {
            for (int l = 0; l < ny; ++l) t.add(0.5 * (lg(i, l) - lg(nx - i, l)));
        } else if (i == 0) {
            for (int k = 0; k < nx; ++k) t.add(0.5 * (lg(k, j) - lg(k, ny - j)));
        } else {
            t.add(0.25 * (lg(i, j) - lg(nx - i, j) - lg(i, ny - j) + lg(nx - i, ny - j)));
        }
        total.add(c * t.value());
    }
    return total.value();
}

double szego_trace_contraction(const FourierProfile& p, int n) {
    check_support(p, n);
    const int nx = p.a * n, ny = p.b * n;
    std::vector<double> phi(size_t(nx) * ny);
    for (int k = 0; k < nx; ++k)
        for (int l = 0; l < ny; ++l) phi[size_t(k) * ny + l] = p((k + 0.5) / n, (l + 0.5) / n);
    NeumaierSum total;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            if (!i && !j) continue;
            double num = 0.0, den = 0.0;
            for (int k = 0; k < nx; ++k)
                for (int l = 0; l < ny; ++l) {
                    double f = mesh_eigenvector(p.a, p.b, n, i, j, k, l);
                    num += phi[size_t(k) * ny + l] * f * f;
                    den += f * f;
                }
            total.add(std::log(mesh_eigenvalue(p.a, p.b, n, i, j)) * num / den);
        }
    return total.value();
}

SzegoConstants szego_constants(const FourierProfile& p) {
    SzegoConstants c;
    const double a = p.a, b = p.b;
    auto edge = [](int i, double ratio, double side) {
        double x = kPi * i * ratio;
        return 0.5 * (std::log(std::expm1(x)) + std::log1p(std::exp(-x)) + std::log(kPi * i / (2.0 * side)) +
                      0.5 * std::log(2.0));
    };
    for (const auto& [ij, v] : p.coeffs) {
        const auto [i, j] = ij;
        if (i > 0 && j == 0) c.c1 += v * edge(i, b / a, a);
        if (i == 0 && j > 0) c.c2 += v * edge(j, a / b, b);
        if (i > 0 && j > 0)
            c.c3 += v * 0.25 * (std::log(kPi * kPi * (i * i / (a * a) + j * j / (b * b))) - std::log(2.0));
    }
    c.c_phi = c.c1 + c.c2 + c.c3 + p.coeff(0, 0) * (rectangle_torsion(a, b) - std::log(2.0) / 4.0);
    return c;
}

double szego_expansion_predicted(const FourierProfile& p, int n) {
    check_support(p, n);
    const double a = p.a, b = p.b, nn = n, ln = std::log(nn);
    double row = 0.0, col = 0.0, all = 0.0;
    for (const auto& [ij, v] : p.coeffs) {
        if (ij.second == 0) row += v;
        if (ij.first == 0) col += v;
        all += v;
    }
    const double a00 = p.coeff(0, 0);
    return (2.0 * a * b * nn * nn * ln + 4.0 * catalan() / kPi * a * b * nn * nn) * a00 -
           log_silver() * nn * (b * row + a * col) - 0.5 * ln * all + szego_constants(p).c_phi;
}

}  // namespace tl
