#include "torsionlab/continuum.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

constexpr double kPi = M_PI;

// Poisson dual of a 1D theta function: offset + c(t) (1 + tail(t)),
// where c(t) = L / (2 sqrt(pi t)).
struct DualTheta {
    double offset, scale, tail;
};

DualTheta dual_theta(double length, double t, bool periodic) {
    DualTheta d{periodic ? 0.0 : 0.5, length / (2.0 * std::sqrt(kPi * t)), 0.0};
    const double rate = periodic ? length * length / (4.0 * t) : length * length / t;
    for (int k = 1;; ++k) {
        double term = 2.0 * std::exp(-rate * k * k);
        d.tail += term;
        if (term < 1e-18 * (1.0 + d.tail)) break;
    }
    return d;
}

double direct_theta(double rate, bool periodic) {
    double sum = 1.0;
    for (int m = 1;; ++m) {
        double term = std::exp(-rate * m * m);
        sum += periodic ? 2.0 * term : term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

bool is_periodic_x(ContinuumKind k) { return k != ContinuumKind::Rectangle; }
bool is_periodic_y(ContinuumKind k) { return k == ContinuumKind::Torus; }

}  // namespace

std::string continuum_kind_name(ContinuumKind k) {
    switch (k) {
        case ContinuumKind::Rectangle: return "rectangle";
        case ContinuumKind::Torus: return "torus";
        case ContinuumKind::Cylinder: return "cylinder";
    }
    return "?";
}

std::vector<double> continuum_spectrum(ContinuumKind kind, double a, double b, double cutoff) {
    if (a <= 0 || b <= 0 || cutoff <= 0) throw Error(ErrorCode::DomainError, "continuum spectrum needs positive sizes");
    // lambda = cx m^2 + cy k^2
    const bool px = is_periodic_x(kind), py = is_periodic_y(kind);
    const double cx = (px ? 4.0 : 1.0) * kPi * kPi / (a * a);
    const double cy = (py ? 4.0 : 1.0) * kPi * kPi / (b * b);
    std::vector<double> out;
    const int mmax = int(std::sqrt(cutoff / cx)) + 1;
    for (int m = 0; m <= mmax; ++m) {
        double xm = cx * m * m;
        if (xm > cutoff) break;
        const int mult_x = (px && m > 0) ? 2 : 1;
        for (int k = 0;; ++k) {
            double v = xm + cy * k * k;
            if (v > cutoff) break;
            const int mult = mult_x * ((py && k > 0) ? 2 : 1);
            for (int r = 0; r < mult; ++r) out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double theta_neumann(double length, double t) {
    const double rate = kPi * kPi * t / (length * length);
    if (rate >= 1.0) return direct_theta(rate, false);
    auto d = dual_theta(length, t, false);
    return d.offset + d.scale * (1.0 + d.tail);
}

double theta_periodic(double length, double t) {
    const double rate = 4.0 * kPi * kPi * t / (length * length);
    if (rate >= 1.0) return direct_theta(rate, true);
    auto d = dual_theta(length, t, true);
    return d.offset + d.scale * (1.0 + d.tail);
}

double heat_trace(ContinuumKind kind, double a, double b, double t) {
    if (t <= 0) throw Error(ErrorCode::DomainError, "heat trace needs t > 0");
    double x = is_periodic_x(kind) ? theta_periodic(a, t) : theta_neumann(a, t);
    double y = is_periodic_y(kind) ? theta_periodic(b, t) : theta_neumann(b, t);
    return x * y;
}

double HeatExpansion::evaluate(double t) const {
    return area / (4.0 * kPi * t) + perimeter / (8.0 * std::sqrt(kPi * t)) + constant;
}

HeatExpansion heat_expansion(ContinuumKind kind, double a, double b) {
    HeatExpansion h;
    h.area = a * b;
    switch (kind) {
        case ContinuumKind::Rectangle:
            h.perimeter = 2 * (a + b);
            h.constant = 0.25;
            break;
        case ContinuumKind::Torus: break;
        case ContinuumKind::Cylinder: h.perimeter = 2 * a; break;
    }
    return h;
}

HeatExpansion heat_expansion(const GeometrySummary& gs) {
    HeatExpansion h;
    h.area = gs.area;
    h.perimeter = gs.perimeter;
    // angle q pi/2: cones (16 - q^2)/(48 q), corners (4 - q^2)/(48 q)
    for (int q : gs.cone_quarters) h.constant += (16.0 - q * q) / (48.0 * q);
    for (int q : gs.corner_quarters) h.constant += (4.0 - q * q) / (48.0 * q);
    return h;
}

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d == 0) throw Error(ErrorCode::DomainError, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

std::string Rational::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

Rational operator+(Rational x, Rational y) { return Rational(x.num * y.den + y.num * x.den, x.den * y.den); }
Rational operator-(Rational x, Rational y) { return Rational(x.num * y.den - y.num * x.den, x.den * y.den); }
Rational operator*(Rational x, Rational y) { return Rational(x.num * y.num, x.den * y.den); }

Rational zeta_zero(const GeometrySummary& gs, int rank, int dim_h0) {
    Rational angles(0);
    for (int q : gs.cone_quarters) angles = angles + Rational(16 - q * q, 4 * q);
    for (int q : gs.corner_quarters) angles = angles + Rational(4 - q * q, 4 * q);
    return Rational(-dim_h0) + Rational(rank, 12) * angles;
}

double zeta_zero_mellin(ContinuumKind kind, double a, double b) {
    const bool px = is_periodic_x(kind), py = is_periodic_y(kind);
    const HeatExpansion ex = heat_expansion(kind, a, b);
    const double area_coef = ex.area / (4.0 * kPi);
    const double half_coef = ex.perimeter / (8.0 * std::sqrt(kPi));
    // heat trace minus its t^{-1}, t^{-1/2} parts and the kernel, from the dual forms
    auto small_t = [&](double t) {
        t = std::max(t, 1e-200);
        auto x = dual_theta(a, t, px);
        auto y = dual_theta(b, t, py);
        double c = x.scale * y.scale;
        return x.offset * y.offset + x.offset * y.scale * y.tail + y.offset * x.scale * x.tail +
               c * (x.tail + y.tail + x.tail * y.tail) - 1.0;
    };
    using GL = boost::math::quadrature::gauss<double, 20>;
    auto zeta_at = [&](double s) {
        // s * int_0^1 t^{s-1} h(t) dt = int_0^1 h(v^{1/s}) dv
        double near = 0.0;
        const int panels = 64;
        for (int p = 0; p < panels; ++p)
            near += GL::integrate([&](double v) { return small_t(std::pow(v, 1.0 / s)); }, double(p) / panels,
                                  double(p + 1) / panels);
        // int_1^inf t^{s-1} (K(t) - 1) dt, exponentially decaying
        double far = 0.0;
        for (double lo = 1.0; lo < 200.0; lo += 1.0)
            far += GL::integrate([&](double t) { return std::pow(t, s - 1.0) * (heat_trace(kind, a, b, t) - 1.0); }, lo,
                                 lo + 1.0);
        double total = near + s * area_coef / (s - 1.0) + s * half_coef / (s - 0.5) + s * far;
        return total / std::tgamma(1.0 + s);
    };
    // zeta is analytic at 0: Neville extrapolation from s = h, h/2, h/4, h/8
    std::vector<double> xs, ys;
    for (double s = 0.01; xs.size() < 4; s /= 2) {
        xs.push_back(s);
        ys.push_back(zeta_at(s));
    }
    for (size_t k = 1; k < xs.size(); ++k)
        for (size_t i = xs.size() - 1; i >= k; --i) ys[i] = (xs[i - k] * ys[i] - xs[i] * ys[i - 1]) / (xs[i - k] - xs[i]);
    return ys.back();
}

double dedekind_eta(double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::DomainError, "eta needs 0 < q < 1");
    double log_prod = std::log(q) / 24.0;
    double qk = q;
    while (qk >= 1e-17) {
        log_prod += std::log1p(-qk);
        qk *= q;
    }
    return std::exp(log_prod);
}

double torus_torsion(double a, double b) {
    double y = a / b;
    return std::log(a * b) + std::log(y) + 4.0 * std::log(dedekind_eta(std::exp(-2.0 * kPi * y)));
}

double rectangle_torsion(double a, double b) {
    double y = a / b;
    return 0.75 * std::log(a * b) + 0.25 * (std::log(y) + 4.0 * std::log(dedekind_eta(std::exp(-2.0 * kPi * y)))) +
           1.5 * std::log(2.0);
}

double cylinder_torsion(double a, double b) {
    // Neumann = Dirichlet plus the circle modes; Neumann and Dirichlet make up torus(a, 2b)
    return 0.5 * torus_torsion(a, 2.0 * b) + std::log(a);
}

double twisted_torus_torsion(double a, double b, double alpha, double beta) {
    const double two_pi = 2.0 * kPi;
    double al = std::fmod(alpha, two_pi);
    if (al < 0) al += two_pi;
    double be = std::fmod(beta, two_pi);
    if (be < 0) be += two_pi;
    if (al == 0.0 && be == 0.0) throw Error(ErrorCode::DomainError, "untwisted torus has a kernel");
    const double x = al / two_pi;
    double total = -(two_pi * b / a) * (x * x - x + 1.0 / 6.0);
    const double cb = std::cos(be);
    auto term = [&](int m) {
        double e = std::exp(-b * std::abs(two_pi * m + al) / a);
        return std::log1p(e * (e - 2.0 * cb));
    };
    total += term(0);
    for (int m = 1;; ++m) {
        double t = term(m) + term(-m);
        total += t;
        if (std::abs(t) < 1e-18 && m > 2) break;
    }
    return total;
}

double rescale_torsion(double logdet, double zeta0, double c) { return logdet - 2.0 * std::log(c) * zeta0; }

}  // namespace tl
