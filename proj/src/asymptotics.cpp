#include "torsionlab/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "torsionlab/errors.hpp"
#include "torsionlab/spectra.hpp"

namespace tl {

namespace {

using Kind = SurfaceSpec::Kind;
constexpr double kPi = M_PI;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool is_zero_phase(double p) {
    double r = std::fmod(p, 2.0 * kPi);
    return r == 0.0;
}

void check_n_list(const std::vector<int>& ns) {
    if (ns.empty()) throw Error(ErrorCode::DomainError, "empty n list");
    for (size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw Error(ErrorCode::DomainError, "n must be positive");
        if (i && ns[i] <= ns[i - 1]) throw Error(ErrorCode::DomainError, "n list must be strictly increasing");
    }
}

void validate(const Setup& s) {
    if (s.rank < 1) throw Error(ErrorCode::DomainError, "rank must be positive");
    if (!s.phases.empty()) {
        if (s.rank != 1) throw Error(ErrorCode::RankUnsupported, "phases describe a U(1) bundle");
        if (s.surface.kind != Kind::Torus && s.surface.kind != Kind::Cylinder)
            throw Error(ErrorCode::BadCuts, "phases need a torus or cylinder");
        size_t want = s.surface.kind == Kind::Torus ? 2 : 1;
        if (s.phases.size() != want) throw Error(ErrorCode::BadCuts, "wrong number of phases");
    }
}

// out[i] = f(i), computed on up to `threads` workers
template <class T, class F>
std::vector<T> parallel_map(size_t count, int threads, F f) {
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errs(count);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < count;) {
            try {
                out[i] = f(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    const int k = std::max(1, std::min<int>(threads, int(count)));
    std::vector<std::thread> pool;
    for (int w = 1; w < k; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    // first failure in n order, so the reported error does not depend on scheduling
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

double phase_at(const Setup& s, size_t k) { return k < s.phases.size() ? s.phases[k] : 0.0; }

}  // namespace

double renormalized_logdet(double logdet, int rank, double area, double perimeter, double zeta0, int n) {
    if (n < 1) throw Error(ErrorCode::DomainError, "n must be positive");
    const double nn = n;
    return logdet - 4.0 * catalan() / kPi * rank * area * nn * nn + 0.5 * log_silver() * rank * perimeter * nn +
           2.0 * zeta0 * std::log(nn);
}

std::string Setup::label() const {
    std::string out = build_surface(surface).name();
    if (rank != 1) out += " rank " + std::to_string(rank);
    if (!phases.empty()) {
        out += " phases(";
        for (size_t i = 0; i < phases.size(); ++i) out += (i ? "," : "") + fmt(phases[i]);
        out += ")";
    }
    return out;
}

bool Setup::twisted() const {
    return std::any_of(phases.begin(), phases.end(), [](double p) { return !is_zero_phase(p); });
}

int Setup::dim_h0() const { return twisted() ? 0 : rank; }

SetupInvariants setup_invariants(const Setup& s) {
    validate(s);
    SetupInvariants inv;
    inv.geometry = geometry_summary(build_surface(s.surface));
    inv.rank = s.rank;
    inv.dim_h0 = s.dim_h0();
    inv.zeta0 = zeta_zero(inv.geometry, s.rank, inv.dim_h0);
    return inv;
}

std::optional<HermitianSpectrum> setup_closed_spectrum(const Setup& s, int n) {
    validate(s);
    const auto& sp = s.surface;
    std::optional<HermitianSpectrum> one;
    switch (sp.kind) {
        case Kind::Rectangle: one = rectangle_mesh_spectrum(sp.a, sp.b, n); break;
        case Kind::Torus: one = torus_mesh_spectrum(sp.a, sp.b, n, phase_at(s, 0), phase_at(s, 1)); break;
        case Kind::Cylinder: one = cylinder_mesh_spectrum(sp.a, sp.b, n, phase_at(s, 0)); break;
        default: return std::nullopt;
    }
    if (s.rank == 1) return one;
    std::vector<double> v;
    v.reserve(one->eigenvalues.size() * s.rank);
    for (double x : one->eigenvalues)
        for (int r = 0; r < s.rank; ++r) v.push_back(x);
    HermitianSpectrum out = make_spectrum(std::move(v));
    out.rescaled = true;
    out.n = n;
    out.rank = s.rank;
    out.source = one->source;
    return out;
}

LogDetPoint setup_logdet(const Setup& s, int n) {
    validate(s);
    const auto& sp = s.surface;
    LogDetPoint p;
    p.n = n;
    std::optional<MeshLogDet> closed;
    switch (sp.kind) {
        case Kind::Rectangle: closed = rectangle_mesh_logdet(sp.a, sp.b, n); break;
        case Kind::Torus: closed = torus_mesh_logdet(sp.a, sp.b, n, phase_at(s, 0), phase_at(s, 1)); break;
        case Kind::Cylinder: closed = cylinder_mesh_logdet(sp.a, sp.b, n, phase_at(s, 0)); break;
        default: break;
    }
    if (closed) {
        p.logdet = s.rank * closed->logdet;
        p.kernel = s.rank * closed->kernel;
        p.method = "closed-form";
        return p;
    }
    auto g = std::make_shared<const MeshGraph>(discretize(build_surface(sp), n));
    if (static_cast<long>(s.rank) * g->vertex_count() > kDenseBudget)
        throw Error(ErrorCode::BudgetExceeded, "r|V| = " + std::to_string(long(s.rank) * g->vertex_count()) +
                                                   " is beyond the dense budget");
    // the trivial rank-r bundle is r copies of the scalar Laplacian
    auto spec = connection_spectrum(trivial_connection(g, 1), 1);
    p.logdet = s.rank * log_det_prime(spec);
    p.kernel = s.rank * spec.kernel_dim;
    p.method = "dense";
    return p;
}

std::optional<double> setup_target(const Setup& s) {
    validate(s);
    const auto& sp = s.surface;
    switch (sp.kind) {
        case Kind::Torus:
            if (s.twisted()) return twisted_torus_torsion(sp.a, sp.b, phase_at(s, 0), phase_at(s, 1));
            return s.rank * torus_torsion(sp.a, sp.b);
        case Kind::Rectangle: return s.rank * (rectangle_torsion(sp.a, sp.b) - std::log(2.0) / 4.0);
        case Kind::Cylinder:
            if (s.twisted()) return std::nullopt;
            return s.rank * cylinder_torsion(sp.a, sp.b);
        default: return std::nullopt;
    }
}

Extrapolation richardson(const std::vector<int>& n, const std::vector<double>& x) {
    if (n.size() != x.size() || x.empty()) throw Error(ErrorCode::DomainError, "mismatched series");
    Extrapolation e;
    e.limit = x.back();
    if (x.size() < 3) {
        e.error = x.size() == 2 ? std::abs(x[1] - x[0]) : 0.0;
        return e;
    }
    const size_t k = x.size() - 3;
    const double n1 = n[k], n2 = n[k + 1], n3 = n[k + 2];
    const double d1 = x[k + 1] - x[k], d2 = x[k + 2] - x[k + 1];
    e.error = std::abs(d2);
    if (d1 == 0.0 || d2 == 0.0 || (d1 > 0) != (d2 > 0) || std::abs(d2) >= std::abs(d1)) return e;
    auto q = [&](double g) {
        return (std::pow(n1, -g) - std::pow(n2, -g)) / (std::pow(n2, -g) - std::pow(n3, -g)) - d1 / d2;
    };
    double lo = 0.01, hi = 12.0;
    if (q(lo) * q(hi) > 0) return e;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (q(lo) * q(mid) <= 0 ? hi : lo) = mid;
    }
    e.gamma = 0.5 * (lo + hi);
    const double c = d2 / (std::pow(n3, -e.gamma) - std::pow(n2, -e.gamma));
    e.limit = x.back() - c * std::pow(n3, -e.gamma);
    e.error = std::abs(x.back() - e.limit);
    return e;
}

std::string RenormSeries::csv() const {
    std::ostringstream os;
    os << "n,logdet,renormalized,extrapolated_limit,target,abs_error\n";
    for (const auto& r : rows) {
        os << r.n << "," << fmt(r.logdet) << "," << fmt(r.renormalized) << "," << fmt(extrapolated.limit) << ",";
        if (target)
            os << fmt(*target) << "," << fmt(std::abs(r.renormalized - *target));
        else
            os << ",";
        os << "\n";
    }
    return os.str();
}

RenormSeries convergence_study(const Setup& s, const std::vector<int>& n_list, int threads) {
    check_n_list(n_list);
    const auto inv = setup_invariants(s);
    RenormSeries out;
    out.label = s.label();
    out.rows = parallel_map<RenormRow>(n_list.size(), threads, [&](size_t i) {
        const int n = n_list[i];
        auto p = setup_logdet(s, n);
        return RenormRow{n, p.logdet,
                         renormalized_logdet(p.logdet, s.rank, inv.geometry.area, inv.geometry.perimeter,
                                             inv.zeta0.value(), n)};
    });
    std::vector<double> values;
    for (const auto& r : out.rows) values.push_back(r.renormalized);
    out.extrapolated = richardson(n_list, values);
    out.target = setup_target(s);
    return out;
}

std::string RatioSeries::csv() const {
    std::ostringstream os;
    os << "n,logdet_a,logdet_b,ratio,continuum_ratio\n";
    for (const auto& r : rows)
        os << r.n << "," << fmt(r.logdet_a) << "," << fmt(r.logdet_b) << "," << fmt(r.ratio) << ","
           << (continuum_ratio ? fmt(*continuum_ratio) : "") << "\n";
    return os.str();
}

RatioSeries ratio_study(const Setup& a, const Setup& b, const std::vector<int>& n_list, int threads) {
    check_n_list(n_list);
    const auto ia = setup_invariants(a), ib = setup_invariants(b);
    const auto& ga = ia.geometry;
    const auto& gb = ib.geometry;
    if (ga.area != gb.area || ga.perimeter != gb.perimeter || ga.cone_quarters != gb.cone_quarters ||
        ga.corner_quarters != gb.corner_quarters || ia.rank != ib.rank || ia.dim_h0 != ib.dim_h0)
        throw Error(ErrorCode::HypothesisViolation, "setups differ in area, perimeter, angles, rank or dim H0");
    RatioSeries out;
    // sorted spectra summed in order, so equal multisets give equal sums
    auto logdet = [](const Setup& s, int n) {
        if (auto sp = setup_closed_spectrum(s, n)) {
            long nonzero = long(sp->eigenvalues.size()) - sp->kernel_dim;
            return log_det_prime(*sp) - 2.0 * nonzero * std::log(double(n));
        }
        return setup_logdet(s, n).logdet;
    };
    out.rows = parallel_map<RatioRow>(n_list.size(), threads, [&](size_t i) {
        RatioRow r;
        r.n = n_list[i];
        r.logdet_a = logdet(a, r.n);
        r.logdet_b = logdet(b, r.n);
        r.ratio = std::exp(r.logdet_a - r.logdet_b);
        return r;
    });
    auto ta = setup_target(a), tb = setup_target(b);
    if (ta && tb) out.continuum_ratio = std::exp(*ta - *tb);
    return out;
}

std::vector<DifferenceRow> difference_series(const Setup& a, const Setup& b, const std::vector<int>& n_list) {
    check_n_list(n_list);
    const auto ia = setup_invariants(a), ib = setup_invariants(b);
    if (ia.geometry.cone_quarters != ib.geometry.cone_quarters ||
        ia.geometry.nonright_quarters != ib.geometry.nonright_quarters || ia.rank != ib.rank)
        throw Error(ErrorCode::HypothesisViolation, "setups differ in cone or corner angles");
    auto ren = [](const Setup& s, const SetupInvariants& inv, int n) {
        return renormalized_logdet(setup_logdet(s, n).logdet, s.rank, inv.geometry.area, inv.geometry.perimeter,
                                   inv.zeta0.value(), n);
    };
    std::vector<DifferenceRow> out;
    for (int n : n_list) {
        DifferenceRow r;
        r.n = n;
        r.renorm_a = ren(a, ia, n);
        r.renorm_b = ren(b, ib, n);
        r.difference = r.renorm_a - r.renorm_b;
        out.push_back(r);
    }
    return out;
}

std::string WeylResult::csv() const {
    std::ostringstream os;
    os << "n,c_n,argmin\n";
    for (const auto& r : table) os << r.n << "," << fmt(r.c_n) << "," << r.argmin << "\n";
    return os.str();
}

WeylResult uniform_weyl_check(const std::vector<HermitianSpectrum>& spectra) {
    if (spectra.empty()) throw Error(ErrorCode::EmptySpectrum, "no spectra");
    WeylResult out;
    out.c_min = INFINITY;
    for (const auto& s : spectra) {
        if (!s.rescaled) throw Error(ErrorCode::DomainError, "Weyl check needs n^2-rescaled spectra");
        WeylRow row;
        row.n = s.n;
        row.c_n = INFINITY;
        for (size_t p = s.kernel_dim; p < s.eigenvalues.size(); ++p) {
            double r = s.eigenvalues[p] / double(p + 1);
            if (r < row.c_n) {
                row.c_n = r;
                row.argmin = int(p + 1);
            }
        }
        if (!std::isfinite(row.c_n)) throw Error(ErrorCode::EmptySpectrum, "spectrum has no nonzero eigenvalue");
        out.c_min = std::min(out.c_min, row.c_n);
        out.table.push_back(row);
    }
    return out;
}

double weyl_slope_deviation(const HermitianSpectrum& s, double area, int lo, int hi) {
    if (lo < 1 || hi < lo || size_t(hi) > s.eigenvalues.size())
        throw Error(ErrorCode::IndexOutOfRange, "Weyl slope window outside the spectrum");
    double worst = 0.0;
    for (int i = lo; i <= hi; ++i) worst = std::max(worst, std::abs(s.eigenvalues[i - 1] * area / (4.0 * kPi * i) - 1.0));
    return worst;
}

// ---- bump profile

namespace {

double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep_prime(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

using Gauss10 = boost::math::quadrature::gauss<double, 10>;

template <class F>
double piecewise_integral(F f) {
    const auto& bp = BumpProfile::breakpoints();
    double s = 0.0;
    for (size_t i = 0; i + 1 < bp.size(); ++i) s += Gauss10::integrate(f, bp[i], bp[i + 1]);
    return s;
}

}  // namespace

const std::vector<double>& BumpProfile::breakpoints() {
    static const std::vector<double> bp{0.0, 1.0 / 8, 1.0 / 4, 1.0 / 3, 1.0 / 2, 2.0 / 3, 3.0 / 4, 7.0 / 8, 1.0};
    return bp;
}

double BumpProfile::rho1(double x) {
    x = std::abs(x);
    if (x <= 0.25) return 1.0;
    if (x >= 0.75) return 0.0;
    return 1.0 - smoothstep(2.0 * (x - 0.25));
}

double BumpProfile::rho1_prime(double x) {
    double ax = std::abs(x);
    if (ax <= 0.25 || ax >= 0.75) return 0.0;
    double d = -2.0 * smoothstep_prime(2.0 * (ax - 0.25));
    return x < 0 ? -d : d;
}

// 1 on [0, 1/8], rises to 4 on [1/4, 1/3], falls to 1/2 at 1/2; then
// rho2(x) = 1 - rho2(1 - x) on [1/2, 1]
double BumpProfile::rho2(double x) {
    x = std::abs(x);
    if (x >= 1.0) return 0.0;
    if (x > 0.5) return 1.0 - rho2(1.0 - x);
    if (x <= 0.125) return 1.0;
    if (x <= 0.25) return 1.0 + 3.0 * smoothstep(8.0 * (x - 0.125));
    if (x <= 1.0 / 3) return 4.0;
    return 0.5 + 3.5 * smoothstep(6.0 * (0.5 - x));
}

double BumpProfile::rho2_prime(double x) {
    double ax = std::abs(x), d = 0.0;
    if (ax >= 1.0) return 0.0;
    if (ax > 0.5) {
        d = rho2_prime(1.0 - ax);
    } else if (ax > 0.125 && ax <= 0.25) {
        d = 24.0 * smoothstep_prime(8.0 * (ax - 0.125));
    } else if (ax > 1.0 / 3) {
        d = -21.0 * smoothstep_prime(6.0 * (0.5 - ax));
    }
    return x < 0 ? -d : d;
}

double BumpProfile::value(double x) const { return t * rho1(x) + (1.0 - t) * rho2(x); }
double BumpProfile::derivative(double x) const { return t * rho1_prime(x) + (1.0 - t) * rho2_prime(x); }

BumpProfile build_bump() {
    BumpProfile p;
    auto defect = [&](double t) {
        return piecewise_integral([t](double x) {
            double r = t * BumpProfile::rho1(x) + (1.0 - t) * BumpProfile::rho2(x);
            return r * (1.0 - r);
        });
    };
    const double f0 = defect(0.0), f1 = defect(1.0);
    if (!(f0 < 0.0 && f1 > 0.0)) throw Error(ErrorCode::BisectionFailure, "int rho(1 - rho) does not change sign");
    auto bracket = boost::math::tools::bisect(defect, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(52));
    p.t = 0.5 * (bracket.first + bracket.second);
    if (!(p.t > 0.0 && p.t < 1.0)) throw Error(ErrorCode::BisectionFailure, "mixing parameter left (0, 1)");

    double sym = 0, plateau = 0, reflect = 0;
    for (int i = 0; i <= 4000; ++i) {
        double x = i / 4000.0;
        sym = std::max(sym, std::abs(p.value(x) - p.value(-x)));
        if (x <= 0.125) plateau = std::max(plateau, std::abs(p.value(x) - 1.0));
        if (x >= 0.875) plateau = std::max(plateau, std::abs(p.value(x)));
        if (x <= 0.5) reflect = std::max(reflect, std::abs(p.value(x + 0.5) + p.value(0.5 - x) - 1.0));
    }
    p.residuals = {sym, plateau, reflect, std::abs(defect(p.t))};
    p.integral = piecewise_integral([&](double x) { return p.value(x); });
    p.integral_sq = piecewise_integral([&](double x) { return p.value(x) * p.value(x); });
    p.c = piecewise_integral([&](double x) { return p.derivative(x) * p.derivative(x); });
    return p;
}

// ---- embedding check

namespace {

struct AxisIntegrals {
    Eigen::MatrixXd mass;       // int h_k h_l
    Eigen::MatrixXd stiffness;  // int h_k' h_l'
};

// one axis of length m vertices at k + 1/2 (grid units)
AxisIntegrals axis_integrals(int m, bool periodic, const BumpProfile& rho) {
    auto h = [&](int k, double u, bool deriv) {
        const double c = k + 0.5;
        if (!periodic) {
            if ((k == 0 && u < c) || (k == m - 1 && u > c)) return deriv ? 0.0 : 1.0;
            return deriv ? rho.derivative(u - c) : rho.value(u - c);
        }
        double s = 0.0;
        for (int w = -1; w <= 1; ++w) s += deriv ? rho.derivative(u - c - w * m) : rho.value(u - c - w * m);
        return s;
    };
    AxisIntegrals out{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m)};
    // every breakpoint of every h_k lies on the 1/24 lattice
    const int panels = 24 * m;
    const auto& nodes = Gauss10::abscissa();
    const auto& weights = Gauss10::weights();
    std::vector<double> hv(m), dv(m);
    for (int p = 0; p < panels; ++p) {
        const double lo = double(p) / 24, half = 0.5 / 24, mid = lo + half;
        for (size_t q = 0; q < nodes.size(); ++q)
            for (int sgn : {-1, 1}) {
                if (q == 0 && sgn == 1 && nodes[0] == 0.0) continue;
                const double u = mid + sgn * half * nodes[q], w = half * weights[q];
                for (int k = 0; k < m; ++k) {
                    hv[k] = h(k, u, false);
                    dv[k] = h(k, u, true);
                }
                for (int k = 0; k < m; ++k)
                    for (int l = 0; l < m; ++l) {
                        out.mass(k, l) += w * hv[k] * hv[l];
                        out.stiffness(k, l) += w * dv[k] * dv[l];
                    }
            }
    }
    return out;
}

}  // namespace

std::vector<bool> interior_support(const SurfaceSpec& surface, int n) {
    if (surface.kind != Kind::Rectangle && surface.kind != Kind::Torus)
        throw Error(ErrorCode::DomainError, "embedding check runs on rectangles and tori");
    MeshGraph g = discretize(build_surface(surface), n);
    std::vector<bool> ok(g.vertex_count(), true);
    for (const auto& [cls, verts] : g.cone_neighbor_sets())
        for (int v : verts) ok[v] = false;
    return ok;
}

EmbeddingResult embedding_check(const SurfaceSpec& surface, int n, const BumpProfile& rho, const std::vector<double>& f) {
    const auto allowed = interior_support(surface, n);
    if (f.size() != allowed.size()) throw Error(ErrorCode::DomainError, "section has the wrong length");
    for (size_t v = 0; v < f.size(); ++v)
        if (f[v] != 0.0 && !allowed[v]) throw Error(ErrorCode::SupportViolation, "section touches a corner neighbourhood");

    EmbeddingResult res;
    const MeshGraph g = discretize(build_surface(surface), n);
    Eigen::Map<const Eigen::VectorXd> fv(f.data(), long(f.size()));
    res.graph_norm2 = fv.squaredNorm();
    res.graph_form = fv.dot(assemble_scalar(g) * fv);
    if (res.graph_norm2 == 0.0) return res;

    const bool periodic = surface.kind == Kind::Torus;
    const int mx = surface.a * n, my = surface.b * n;
    const auto ax = axis_integrals(mx, periodic, rho);
    const auto ay = axis_integrals(my, periodic, rho);
    std::vector<std::pair<int, int>> pos(f.size());
    for (int v = 0; v < g.vertex_count(); ++v) {
        const auto& mv = g.vertex(v);
        pos[v] = {(mv.tile % surface.a) * n + mv.i, (mv.tile / surface.a) * n + mv.j};
    }
    double mass = 0.0, energy = 0.0;
    for (size_t p = 0; p < f.size(); ++p) {
        if (f[p] == 0.0) continue;
        for (size_t q = 0; q < f.size(); ++q) {
            if (f[q] == 0.0) continue;
            const auto [xp, yp] = pos[p];
            const auto [xq, yq] = pos[q];
            const double w = f[p] * f[q];
            mass += w * ax.mass(xp, xq) * ay.mass(yp, yq);
            energy += w * (ax.stiffness(xp, xq) * ay.mass(yp, yq) + ax.mass(xp, xq) * ay.stiffness(yp, yq));
        }
    }
    // physical units: dx dy = du dv / n^2 and |grad|^2 dx dy = |grad_u|^2 du dv
    res.mu_norm2 = mass / (double(n) * n);
    res.mu_energy = energy;
    res.norm_ratio = res.mu_norm2 / (res.graph_norm2 / (double(n) * n));
    if (res.graph_form > 0.0)
        res.form_ratio = res.mu_energy / (rho.c * res.graph_form);
    else
        res.form_ratio = std::abs(res.mu_energy) < 1e-12 ? 1.0 : INFINITY;
    return res;
}

}  // namespace tl
