#include "torsionlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Core>

#include "torsionlab/asymptotics.hpp"
#include "torsionlab/combinatorics.hpp"
#include "torsionlab/continuum.hpp"
#include "torsionlab/laplacian.hpp"
#include "torsionlab/mesh.hpp"
#include "torsionlab/spectra.hpp"

#ifndef TORSIONLAB_VERSION
#define TORSIONLAB_VERSION "dev"
#endif

namespace tl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Kind = SurfaceSpec::Kind;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

const std::vector<std::pair<std::string, ExperimentKind>>& kind_table() {
    static const std::vector<std::pair<std::string, ExperimentKind>> t{
        {"spectrum", ExperimentKind::Spectrum},         {"logdet", ExperimentKind::LogDet},
        {"renorm-series", ExperimentKind::RenormSeries}, {"ratio", ExperimentKind::Ratio},
        {"crsf-verify", ExperimentKind::CrsfVerify},     {"szego", ExperimentKind::Szego},
        {"heat-trace", ExperimentKind::HeatTrace},       {"zeta0", ExperimentKind::Zeta0},
        {"torsion", ExperimentKind::Torsion},            {"weyl-check", ExperimentKind::WeylCheck},
        {"embedding-check", ExperimentKind::EmbeddingCheck}};
    return t;
}

// ---- config parsing

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("field '") + key + "': " + e.what());
    }
}

int get_int(const json& j, const char* key) {
    if (!j.contains(key)) config_error(std::string("missing field '") + key + "'");
    if (!j.at(key).is_number_integer()) config_error(std::string("field '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

SurfaceSpec parse_surface(const json& j) {
    if (!j.is_object()) config_error("surface must be an object");
    const std::string type = get_or<std::string>(j, "type", "");
    if (type == "rectangle") return SurfaceSpec::rectangle(get_int(j, "a"), get_int(j, "b"));
    if (type == "torus") return SurfaceSpec::torus(get_int(j, "a"), get_int(j, "b"));
    if (type == "cylinder") return SurfaceSpec::cylinder(get_int(j, "a"), get_int(j, "b"));
    if (type == "lshape") return SurfaceSpec::lshape();
    if (type == "slit") return SurfaceSpec::slit();
    if (type == "cone") return SurfaceSpec::cone(get_int(j, "k"));
    if (type == "angle") return SurfaceSpec::angle(get_int(j, "k"));
    if (type == "raw") {
        SurfaceSpec s;
        s.kind = Kind::Raw;
        s.tiles = get_int(j, "tiles");
        if (!j.contains("pairings") || !j["pairings"].is_array()) config_error("raw surface needs a pairings array");
        for (const auto& p : j["pairings"]) {
            if (!p.is_array() || p.size() < 4 || p.size() > 5) config_error("pairing must be [t1, side1, t2, side2, type?]");
            try {
                SurfaceSpec::RawPairing rp{p[0].get<int>(), parse_side(p[1].get<std::string>()), p[2].get<int>(),
                                           parse_side(p[3].get<std::string>()), {}};
                if (p.size() == 5) {
                    auto g = p[4].get<std::string>();
                    if (g == "translation")
                        rp.type = Gluing::Translation;
                    else if (g == "half-turn")
                        rp.type = Gluing::HalfTurn;
                    else
                        config_error("unknown gluing type '" + g + "'");
                }
                s.pairings.push_back(rp);
            } catch (const json::exception& e) {
                config_error(std::string("bad pairing: ") + e.what());
            } catch (const Error& e) {
                config_error(e.what());
            }
        }
        return s;
    }
    config_error("unknown surface type '" + type + "'");
}

CMat parse_matrix(const json& m) {
    if (!m.is_array() || m.empty()) config_error("holonomy matrix must be a non-empty array of rows");
    const long r = long(m.size());
    CMat out(r, r);
    for (long i = 0; i < r; ++i) {
        if (!m[i].is_array() || long(m[i].size()) != r) config_error("holonomy matrix must be square");
        for (long k = 0; k < r; ++k) {
            const auto& e = m[i][k];
            if (e.is_number())
                out(i, k) = e.get<double>();
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                out(i, k) = {e[0].get<double>(), e[1].get<double>()};
            else
                config_error("matrix entry must be a number or [re, im]");
        }
    }
    return out;
}

BundleSpec parse_bundle(const json& j) {
    BundleSpec b;
    if (j.is_null()) return b;
    if (!j.is_object()) config_error("bundle must be an object");
    int given = int(j.contains("phases")) + int(j.contains("holonomy")) + int(j.contains("random"));
    if (given > 1) config_error("bundle takes one of phases, holonomy, random");
    b.rank = get_or<int>(j, "rank", 1);
    if (b.rank < 1) config_error("bundle rank must be positive");
    if (j.contains("phases")) {
        b.phases = get_or<std::vector<double>>(j, "phases", {});
        if (b.rank != 1) config_error("phases describe a rank-1 bundle");
    }
    if (j.contains("holonomy")) {
        if (!j["holonomy"].is_array()) config_error("holonomy must be an array of matrices");
        for (const auto& m : j["holonomy"]) b.holonomy.push_back(parse_matrix(m));
        if (b.holonomy.empty()) config_error("holonomy is empty");
        b.rank = int(b.holonomy[0].rows());
        for (const auto& m : b.holonomy)
            if (m.rows() != b.rank) config_error("holonomy matrices differ in size");
    }
    if (j.contains("random")) {
        b.random = get_or<std::string>(j, "random", "");
        if (b.random == "u1")
            b.rank = 1;
        else if (b.random == "su2" || b.random == "su2-commuting")
            b.rank = 2;
        else
            config_error("random bundle must be u1, su2 or su2-commuting");
        b.count = get_or<int>(j, "count", 1);
        if (b.count < 1) config_error("random count must be positive");
    }
    return b;
}

bool setup_compatible(const BundleSpec& b) { return b.holonomy.empty() && b.random.empty(); }

Setup to_setup(const SurfaceSpec& s, const BundleSpec& b) {
    if (!setup_compatible(b)) config_error("this experiment takes a trivial bundle or U(1) phases");
    return Setup{s, b.rank, b.phases};
}

bool needs_n_list(ExperimentKind k) {
    return k != ExperimentKind::HeatTrace && k != ExperimentKind::Zeta0 && k != ExperimentKind::Torsion;
}

bool is_grid(const SurfaceSpec& s) {
    return s.kind == Kind::Rectangle || s.kind == Kind::Torus || s.kind == Kind::Cylinder;
}

ContinuumKind continuum_of(const SurfaceSpec& s) {
    switch (s.kind) {
        case Kind::Rectangle: return ContinuumKind::Rectangle;
        case Kind::Torus: return ContinuumKind::Torus;
        case Kind::Cylinder: return ContinuumKind::Cylinder;
        default: config_error("experiment needs a rectangle, torus or cylinder");
    }
}

// ---- bundles on meshes

std::vector<HolonomyRepresentation> representations(const SurfaceSpec& s, const BundleSpec& b, std::mt19937_64& rng) {
    std::vector<HolonomyRepresentation> out;
    const int gens = int(default_cuts(s).generators.size());
    if (!b.holonomy.empty()) {
        if (int(b.holonomy.size()) != gens) config_error("holonomy needs one matrix per generator");
        out.push_back({b.rank, b.holonomy});
        return out;
    }
    if (!b.phases.empty()) {
        if (int(b.phases.size()) != gens) config_error("phases need one angle per generator");
        std::vector<CMat> g;
        for (double p : b.phases) g.push_back(phase(p));
        out.push_back({1, g});
        return out;
    }
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    for (int rep = 0; rep < b.count; ++rep) {
        std::vector<CMat> g;
        if (b.random == "u1") {
            for (int k = 0; k < gens; ++k) g.push_back(phase(angle(rng)));
        } else if (b.random == "su2" || gens == 1) {
            for (int k = 0; k < gens; ++k) g.push_back(random_unitary(2, rng, true));
        } else {
            auto [x, y] = random_commuting_su2(rng);
            g = {x, y};
        }
        out.push_back({b.rank, g});
    }
    return out;
}

std::vector<UnitaryConnection> connections(const SurfaceSpec& s, const BundleSpec& b, int n, std::mt19937_64& rng) {
    auto g = std::make_shared<const MeshGraph>(discretize(build_surface(s), n));
    std::vector<UnitaryConnection> out;
    if (setup_compatible(b) && b.phases.empty()) {
        out.push_back(trivial_connection(g, b.rank));
        return out;
    }
    const auto cuts = default_cuts(s);
    for (const auto& rep : representations(s, b, rng)) out.push_back(connection_from_holonomy(g, rep, cuts));
    return out;
}

void check_dense_budget(const MeshGraph& g, int rank) {
    if (long(rank) * g.vertex_count() > kDenseBudget)
        throw Error(ErrorCode::BudgetExceeded,
                    "r|V| = " + std::to_string(long(rank) * g.vertex_count()) + " is beyond the dense budget");
}

HermitianSpectrum dense_spectrum(const UnitaryConnection& c, std::optional<int> kernel, double tol) {
    check_dense_budget(c.graph(), c.rank());
    return connection_spectrum(c, kernel, tol);
}

// ---- experiments

struct Context {
    const ExperimentConfig& cfg;
    std::mt19937_64 rng;
    int threads;
    Artifacts art;
    std::string csv_name(const std::string& fallback) const { return cfg.output.empty() ? fallback : cfg.output; }
};

void run_spectrum(Context& cx) {
    const auto& cfg = cx.cfg;
    json files = json::array();
    for (int n : cfg.n_list) {
        HermitianSpectrum s;
        if (setup_compatible(cfg.bundle) && is_grid(cfg.surface)) {
            s = *setup_closed_spectrum(to_setup(cfg.surface, cfg.bundle), n);
        } else {
            auto cs = connections(cfg.surface, cfg.bundle, n, cx.rng);
            std::optional<int> k;
            if (setup_compatible(cfg.bundle)) k = Setup{cfg.surface, cfg.bundle.rank, cfg.bundle.phases}.dim_h0();
            s = rescale_spectrum(dense_spectrum(cs.front(), k, cfg.kernel_tol), n);
        }
        const std::string stem = "spectrum_n" + std::to_string(n);
        cx.art.files[stem + ".csv"] = spectrum_csv(s);
        json side;
        side["surface"] = build_surface(cfg.surface).name();
        side["n"] = n;
        side["rank"] = s.rank;
        side["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
        side["kernel_dim"] = s.kernel_dim;
        side["rescaled"] = s.rescaled;
        side["source"] = s.source;
        cx.art.files[stem + ".json"] = side.dump(2) + "\n";
        cx.art.report.push_back("n=" + std::to_string(n) + " eigenvalues=" + std::to_string(s.eigenvalues.size()) +
                                " kernel=" + std::to_string(s.kernel_dim) + " source=" + s.source);
    }
}

void run_logdet(Context& cx) {
    const auto& cfg = cx.cfg;
    std::ostringstream os;
    os << "n,logdet,kernel,method\n";
    for (int n : cfg.n_list) {
        if (setup_compatible(cfg.bundle)) {
            auto p = setup_logdet(to_setup(cfg.surface, cfg.bundle), n);
            os << n << "," << num(p.logdet) << "," << p.kernel << "," << p.method << "\n";
            continue;
        }
        for (const auto& c : connections(cfg.surface, cfg.bundle, n, cx.rng)) {
            auto s = dense_spectrum(c, std::nullopt, cfg.kernel_tol);
            os << n << "," << num(log_det_prime(s)) << "," << s.kernel_dim << ",dense\n";
        }
    }
    cx.art.files[cx.csv_name("logdet.csv")] = os.str();
}

void run_renorm(Context& cx) {
    const auto& cfg = cx.cfg;
    auto series = convergence_study(to_setup(cfg.surface, cfg.bundle), cfg.n_list, cx.threads);
    cx.art.files[cx.csv_name("renorm_series.csv")] = series.csv();
    PlotSeries plot{series.label, "n", series.target ? "|renormalized - target|" : "|successive difference|", {}};
    for (size_t i = 0; i < series.rows.size(); ++i) {
        double y = series.target ? std::abs(series.rows[i].renormalized - *series.target)
                                 : (i ? std::abs(series.rows[i].renormalized - series.rows[i - 1].renormalized) : 0.0);
        plot.points.push_back({double(series.rows[i].n), y});
    }
    cx.art.plot = plot;
    cx.art.extra["extrapolated_limit"] = series.extrapolated.limit;
    cx.art.extra["extrapolation_error"] = series.extrapolated.error;
    cx.art.extra["fitted_exponent"] = series.extrapolated.gamma;
    cx.art.extra["target"] = series.target ? json(*series.target) : json(nullptr);
    const auto& last = series.rows.back();
    std::string line = series.label + " n=" + std::to_string(last.n) + " renormalized=" + short_num(last.renormalized) +
                       " extrapolated=" + short_num(series.extrapolated.limit);
    if (series.target) line += " target=" + short_num(*series.target);
    cx.art.report.push_back(line);
}

void run_ratio(Context& cx) {
    const auto& cfg = cx.cfg;
    if (!cfg.surface_b) config_error("ratio needs surface_b");
    auto a = to_setup(cfg.surface, cfg.bundle);
    auto b = to_setup(*cfg.surface_b, cfg.bundle_b.value_or(BundleSpec{}));
    auto series = ratio_study(a, b, cfg.n_list, cx.threads);
    cx.art.files[cx.csv_name("ratio.csv")] = series.csv();
    PlotSeries plot{a.label() + " / " + b.label(), "n",
                    series.continuum_ratio ? "|ratio - continuum|" : "|successive difference|", {}};
    for (size_t i = 0; i < series.rows.size(); ++i) {
        double y = series.continuum_ratio ? std::abs(series.rows[i].ratio - *series.continuum_ratio)
                                          : (i ? std::abs(series.rows[i].ratio - series.rows[i - 1].ratio) : 0.0);
        plot.points.push_back({double(series.rows[i].n), y});
    }
    cx.art.plot = plot;
    cx.art.extra["continuum_ratio"] = series.continuum_ratio ? json(*series.continuum_ratio) : json(nullptr);
    cx.art.report.push_back("ratio(n=" + std::to_string(series.rows.back().n) + ")=" + short_num(series.rows.back().ratio));
}

void run_crsf(Context& cx) {
    const auto& cfg = cx.cfg;
    std::ostringstream os;
    os << "n,rep,crsf_sum,det,reference,rel_error,ok\n";
    bool all_ok = true;
    for (int n : cfg.n_list) {
        int rep = 0;
        for (const auto& c : connections(cfg.surface, cfg.bundle, n, cx.rng)) {
            if (c.rank() != 1 && c.rank() != 2) throw Error(ErrorCode::RankUnsupported, "CRSF identity needs rank 1 or 2");
            const double sum = crsf_weighted_sum(c);
            auto s = dense_spectrum(c, std::nullopt, cfg.kernel_tol);
            const double det = s.kernel_dim == 0 ? determinant_extended(c) : 0.0;
            const double ref = c.rank() == 2 ? std::sqrt(det) : det;
            const double rel = ref > 0 ? std::abs(sum - ref) / ref : std::abs(sum);
            const bool ok = rel < cfg.identity_tol;
            all_ok = all_ok && ok;
            os << n << "," << rep << "," << num(sum) << "," << num(det) << "," << num(ref) << "," << num(rel) << ","
               << (ok ? "true" : "false") << "\n";
            cx.art.report.push_back("sum=" + short_num(sum) + " det=" + short_num(det) +
                                    (c.rank() == 2 ? " sqrt_ok=" : " ok=") + (ok ? "true" : "false"));
            if (cfg.bundle.count == 1 && c.graph().vertex_count() <= kEnumerationVertexLimit && rep == 0)
                cx.art.files["crsf_census_n" + std::to_string(n) + ".csv"] = census_csv(crsf_census(c));
            ++rep;
        }
    }
    cx.art.files[cx.csv_name("crsf_verify.csv")] = os.str();
    cx.art.extra["identity_holds"] = all_ok;
}

void run_szego(Context& cx) {
    const auto& cfg = cx.cfg;
    if (cfg.surface.kind != Kind::Rectangle) config_error("szego runs on rectangles");
    if (cfg.profile.empty()) config_error("szego needs a profile");
    FourierProfile p{cfg.surface.a, cfg.surface.b, cfg.profile};
    std::ostringstream os;
    os << "n,direct,predicted,abs_diff\n";
    PlotSeries plot{"Szego trace", "n", "|direct - predicted|", {}};
    for (int n : cfg.n_list) {
        const double d = szego_trace_direct(p, n), q = szego_expansion_predicted(p, n);
        os << n << "," << num(d) << "," << num(q) << "," << num(std::abs(d - q)) << "\n";
        plot.points.push_back({double(n), std::abs(d - q)});
    }
    auto k = szego_constants(p);
    cx.art.extra["c1"] = k.c1;
    cx.art.extra["c2"] = k.c2;
    cx.art.extra["c3"] = k.c3;
    cx.art.extra["c_phi"] = k.c_phi;
    cx.art.plot = plot;
    cx.art.files[cx.csv_name("szego.csv")] = os.str();
    cx.art.report.push_back("c_phi=" + short_num(k.c_phi) + " last_abs_diff=" + short_num(plot.points.back().second));
}

void run_heat(Context& cx) {
    const auto& cfg = cx.cfg;
    const auto kind = continuum_of(cfg.surface);
    if (cfg.t_list.empty()) config_error("heat-trace needs t_list");
    const auto ex = heat_expansion(kind, cfg.surface.a, cfg.surface.b);
    std::ostringstream os;
    os << "t,theta_trace,expansion,abs_residual\n";
    PlotSeries plot{"heat trace " + std::string(continuum_kind_name(kind)), "t", "|theta - expansion|", {}};
    double worst = 0.0;
    for (double t : cfg.t_list) {
        const double h = heat_trace(kind, cfg.surface.a, cfg.surface.b, t), e = ex.evaluate(t);
        os << num(t) << "," << num(h) << "," << num(e) << "," << num(std::abs(h - e)) << "\n";
        plot.points.push_back({t, std::abs(h - e)});
        worst = std::max(worst, std::abs(h - e));
    }
    cx.art.plot = plot;
    cx.art.extra["max_abs_residual"] = worst;
    cx.art.files[cx.csv_name("heat_trace.csv")] = os.str();
    cx.art.report.push_back("max_abs_residual=" + short_num(worst));
}

void run_zeta0(Context& cx) {
    const auto& cfg = cx.cfg;
    auto setup = to_setup(cfg.surface, cfg.bundle);
    auto inv = setup_invariants(setup);
    std::optional<double> mellin;
    if (is_grid(cfg.surface) && !setup.twisted())
        mellin = cfg.bundle.rank * zeta_zero_mellin(continuum_of(cfg.surface), cfg.surface.a, cfg.surface.b);
    std::ostringstream os;
    os << "surface,rank,dim_h0,zeta0,zeta0_value,mellin\n";
    os << csv_field(setup.label()) << "," << inv.rank << "," << inv.dim_h0 << "," << inv.zeta0.str() << ","
       << num(inv.zeta0.value()) << "," << (mellin ? num(*mellin) : "") << "\n";
    cx.art.files[cx.csv_name("zeta0.csv")] = os.str();
    cx.art.report.push_back("zeta0=" + inv.zeta0.str());
}

void run_torsion(Context& cx) {
    const auto& cfg = cx.cfg;
    auto setup = to_setup(cfg.surface, cfg.bundle);
    auto target = setup_target(setup);
    if (!target) config_error("no closed-form torsion for " + setup.label());
    std::ostringstream os;
    os << "surface,rank,alpha,beta,log_det\n";
    os << csv_field(build_surface(cfg.surface).name()) << "," << setup.rank << ","
       << num(setup.phases.size() > 0 ? setup.phases[0] : 0.0) << ","
       << num(setup.phases.size() > 1 ? setup.phases[1] : 0.0) << "," << num(*target) << "\n";
    cx.art.files[cx.csv_name("torsion.csv")] = os.str();
    cx.art.report.push_back("log_det=" + short_num(*target));
}

void run_weyl(Context& cx) {
    const auto& cfg = cx.cfg;
    auto setup = to_setup(cfg.surface, cfg.bundle);
    auto spectrum_at = [&](int n) {
        if (auto s = setup_closed_spectrum(setup, n)) return *s;
        auto g = std::make_shared<const MeshGraph>(discretize(build_surface(cfg.surface), n));
        return rescale_spectrum(dense_spectrum(trivial_connection(g, setup.rank), setup.dim_h0(), cfg.kernel_tol), n);
    };
    std::vector<HermitianSpectrum> specs;
    for (int n : cfg.n_list) specs.push_back(spectrum_at(n));
    auto w = uniform_weyl_check(specs);
    cx.art.files[cx.csv_name("weyl.csv")] = w.csv();
    cx.art.extra["c_min"] = w.c_min;
    cx.art.report.push_back("c_min=" + short_num(w.c_min));
    if (cfg.weyl_slope) {
        const auto& ws = *cfg.weyl_slope;
        const double area = geometry_summary(build_surface(cfg.surface)).area;
        const double dev = weyl_slope_deviation(spectrum_at(ws.n), area, ws.lo, ws.hi);
        cx.art.files["weyl_slope.csv"] = "n,lo,hi,max_deviation\n" + std::to_string(ws.n) + "," +
                                         std::to_string(ws.lo) + "," + std::to_string(ws.hi) + "," + num(dev) + "\n";
        cx.art.extra["slope_max_deviation"] = dev;
        cx.art.report.push_back("slope_max_deviation=" + short_num(dev));
    }
}

void run_embedding(Context& cx) {
    const auto& cfg = cx.cfg;
    if (!setup_compatible(cfg.bundle) || cfg.bundle.rank != 1 || !cfg.bundle.phases.empty())
        config_error("embedding-check runs on the trivial line bundle");
    const auto rho = build_bump();
    std::normal_distribution<double> gauss;
    std::ostringstream os;
    os << "n,sample,norm_ratio,form_ratio\n";
    double worst = 0.0;
    for (int n : cfg.n_list) {
        const auto ok = interior_support(cfg.surface, n);
        for (int k = 0; k < cfg.samples; ++k) {
            std::vector<double> f(ok.size(), 0.0);
            for (size_t v = 0; v < ok.size(); ++v)
                if (ok[v]) f[v] = gauss(cx.rng);
            auto e = embedding_check(cfg.surface, n, rho, f);
            worst = std::max({worst, std::abs(e.norm_ratio - 1.0), std::abs(e.form_ratio - 1.0)});
            os << n << "," << k << "," << num(e.norm_ratio) << "," << num(e.form_ratio) << "\n";
        }
    }
    cx.art.files[cx.csv_name("embedding.csv")] = os.str();
    cx.art.extra["bump_t"] = rho.t;
    cx.art.extra["bump_C"] = rho.c;
    cx.art.extra["bump_residuals"] = rho.residuals;
    cx.art.extra["max_ratio_deviation"] = worst;
    cx.art.report.push_back("t=" + short_num(rho.t) + " C=" + short_num(rho.c) + " max_ratio_deviation=" + short_num(worst));
}

// ---- plotting

std::string fixed(double x, int digits = 1) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else if (c == '&')
            out += "&amp;";
        else
            out += c;
    }
    return out;
}

}  // namespace

const char* kind_name(ExperimentKind k) {
    for (const auto& [name, kind] : kind_table())
        if (kind == k) return name.c_str();
    return "?";
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) config_error("config must be a JSON object");
    ExperimentConfig c;
    c.raw = j;
    const std::string kind = get_or<std::string>(j, "kind", "");
    auto it = std::find_if(kind_table().begin(), kind_table().end(), [&](const auto& p) { return p.first == kind; });
    if (it == kind_table().end()) config_error("unknown experiment kind '" + kind + "'");
    c.kind = it->second;
    if (!j.contains("surface")) config_error("missing surface");
    c.surface = parse_surface(j["surface"]);
    c.bundle = parse_bundle(j.contains("bundle") ? j["bundle"] : json());
    if (j.contains("surface_b")) c.surface_b = parse_surface(j["surface_b"]);
    if (j.contains("bundle_b")) c.bundle_b = parse_bundle(j["bundle_b"]);
    c.n_list = get_or<std::vector<int>>(j, "n_list", {});
    if (needs_n_list(c.kind)) {
        if (c.n_list.empty()) config_error("n_list must be non-empty");
        for (size_t i = 0; i < c.n_list.size(); ++i) {
            if (c.n_list[i] < 1) config_error("n_list entries must be positive");
            if (i && c.n_list[i] <= c.n_list[i - 1]) config_error("n_list must be strictly ascending");
        }
    }
    c.t_list = get_or<std::vector<double>>(j, "t_list", {});
    for (double t : c.t_list)
        if (!(t > 0)) config_error("t_list entries must be positive");
    if (j.contains("profile")) {
        if (!j["profile"].is_array()) config_error("profile must be an array of [i, j, coefficient]");
        for (const auto& e : j["profile"]) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
                !e[2].is_number())
                config_error("profile entry must be [i, j, coefficient]");
            c.profile[{e[0].get<int>(), e[1].get<int>()}] = e[2].get<double>();
        }
    }
    if (j.contains("weyl_slope")) {
        const auto& w = j["weyl_slope"];
        c.weyl_slope = WeylSlope{get_int(w, "n"), get_int(w, "lo"), get_int(w, "hi")};
    }
    c.samples = get_or<int>(j, "samples", 100);
    if (c.samples < 1) config_error("samples must be positive");
    if (j.contains("outputs")) c.output = get_or<std::string>(j["outputs"], "csv", "");
    if (c.output.find('/') != std::string::npos || c.output == "meta.json" || c.output == "plot.svg")
        config_error("output name must be a plain file name");
    if (j.contains("seed")) c.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        c.kernel_tol = get_or<double>(t, "kernel", c.kernel_tol);
        c.identity_tol = get_or<double>(t, "identity", c.identity_tol);
    }
    switch (c.kind) {
        case ExperimentKind::Ratio:
            if (!c.surface_b) config_error("ratio needs surface_b");
            break;
        case ExperimentKind::Szego:
            if (c.profile.empty()) config_error("szego needs a profile");
            break;
        case ExperimentKind::HeatTrace:
            if (c.t_list.empty()) config_error("heat-trace needs t_list");
            break;
        default: break;
    }
    return c;
}

ExperimentConfig load_config(const fs::path& p) {
    std::ifstream in(p);
    if (!in) config_error("cannot read " + p.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        config_error(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

Artifacts execute(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
    Context cx{cfg, std::mt19937_64(seed), std::max(1, threads), {}};
    switch (cfg.kind) {
        case ExperimentKind::Spectrum: run_spectrum(cx); break;
        case ExperimentKind::LogDet: run_logdet(cx); break;
        case ExperimentKind::RenormSeries: run_renorm(cx); break;
        case ExperimentKind::Ratio: run_ratio(cx); break;
        case ExperimentKind::CrsfVerify: run_crsf(cx); break;
        case ExperimentKind::Szego: run_szego(cx); break;
        case ExperimentKind::HeatTrace: run_heat(cx); break;
        case ExperimentKind::Zeta0: run_zeta0(cx); break;
        case ExperimentKind::Torsion: run_torsion(cx); break;
        case ExperimentKind::WeylCheck: run_weyl(cx); break;
        case ExperimentKind::EmbeddingCheck: run_embedding(cx); break;
    }
    return std::move(cx.art);
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::BudgetExceeded:
        case ErrorCode::TooLarge: return 3;
        case ErrorCode::KernelMismatch:
        case ErrorCode::NegativeUnderSqrt:
        case ErrorCode::BisectionFailure: return 1;
        default: return 2;
    }
}

void write_atomic(const fs::path& p, const std::string& contents) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error(ErrorCode::ConfigError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, p);
}

std::string svg_plot(const PlotSeries& s) {
    std::vector<std::pair<double, double>> pts;
    for (auto [x, y] : s.points)
        if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) pts.push_back({std::log10(x), std::log10(y)});
    const double w = 640, h = 400, l = 70, r = 20, t = 40, b = 50;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(s.title)
       << "</text>\n";
    if (pts.empty()) {
        os << "<text x=\"" << w / 2 << "\" y=\"" << h / 2 << "\" text-anchor=\"middle\">no positive data</text>\n</svg>\n";
        return os.str();
    }
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (auto [x, y] : pts) {
        x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
    auto px = [&](double x) { return l + (x - x0) / (x1 - x0) * (w - l - r); };
    auto py = [&](double y) { return h - b - (y - y0) / (y1 - y0) * (h - t - b); };
    os << "<g stroke=\"#888\" stroke-width=\"0.5\">\n";
    for (double d = x0; d <= x1 + 1e-9; d += 1)
        os << "<line x1=\"" << fixed(px(d)) << "\" y1=\"" << t << "\" x2=\"" << fixed(px(d)) << "\" y2=\"" << h - b
           << "\"/>\n";
    for (double d = y0; d <= y1 + 1e-9; d += 1)
        os << "<line x1=\"" << l << "\" y1=\"" << fixed(py(d)) << "\" x2=\"" << w - r << "\" y2=\"" << fixed(py(d))
           << "\"/>\n";
    os << "</g>\n<g font-size=\"11\">\n";
    for (double d = x0; d <= x1 + 1e-9; d += 1)
        os << "<text x=\"" << fixed(px(d)) << "\" y=\"" << h - b + 16 << "\" text-anchor=\"middle\">1e" << int(d)
           << "</text>\n";
    for (double d = y0; d <= y1 + 1e-9; d += 1)
        os << "<text x=\"" << l - 6 << "\" y=\"" << fixed(py(d) + 4) << "\" text-anchor=\"end\">1e" << int(d)
           << "</text>\n";
    os << "<text x=\"" << (l + w - r) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << xml_escape(s.x_label)
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << (t + h - b) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (t + h - b) / 2 << ")\">" << xml_escape(s.y_label) << "</text>\n</g>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i)
        os << (i ? " " : "") << fixed(px(pts[i].first), 2) << "," << fixed(py(pts[i].second), 2);
    os << "\"/>\n";
    for (auto [x, y] : pts)
        os << "<circle cx=\"" << fixed(px(x), 2) << "\" cy=\"" << fixed(py(y), 2) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    os << "</svg>\n";
    return os.str();
}

int resolve_threads(std::optional<int> flag) {
    if (flag) return std::max(1, *flag);
    if (const char* env = std::getenv("TORSIONLAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return int(v);
    }
    return 1;
}

int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(opt.config);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e.code());
    }
    const std::uint64_t seed = opt.seed ? *opt.seed : cfg.seed.value_or(1);
    cfg.seed = seed;
    const int threads = resolve_threads(opt.threads);

    json meta;
    meta["tool"] = "torsionlab";
    meta["version"] = TORSIONLAB_VERSION;
    meta["versions"] = {{"compiler", __VERSION__},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    meta["kind"] = kind_name(cfg.kind);
    meta["config"] = cfg.raw;
    meta["seed"] = seed;
    meta["threads"] = threads;

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    int code = 0;
    Artifacts art;
    try {
        art = execute(cfg, seed, threads);
    } catch (const Error& e) {
        code = exit_code_for(e.code());
        meta["status"] = "error";
        meta["error"] = {{"code", code_name(e.code())}, {"exit_code", code}, {"message", e.what()}};
        err << e.what() << "\n";
    }
    try {
        fs::create_directories(opt.out);
        json outputs = json::array();
        if (code == 0) {
            for (const auto& [name, contents] : art.files) {
                write_atomic(opt.out / name, contents);
                outputs.push_back(name);
            }
            if (opt.plot) {
                if (art.plot) {
                    write_atomic(opt.out / "plot.svg", svg_plot(*art.plot));
                    outputs.push_back("plot.svg");
                } else {
                    meta["plot"] = "no error curve for this kind";
                }
            }
            meta["status"] = "ok";
            meta["results"] = art.extra;
        }
        meta["outputs"] = outputs;
        meta["wall_time_s"] = elapsed();
        write_atomic(opt.out / "meta.json", meta.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "cannot write outputs: " << e.what() << "\n";
        return 2;
    }
    for (const auto& line : art.report) out << line << "\n";
    return code;
}

// ---- self test

std::vector<SelftestCheck> selftest(std::uint64_t seed, std::optional<double> catalan_fault) {
    std::optional<CatalanOverride> fault;
    if (catalan_fault) fault.emplace(*catalan_fault);
    std::mt19937_64 rng(seed);
    std::vector<SelftestCheck> out;
    auto check = [&](const std::string& name, auto&& body) {
        SelftestCheck c{name, false, ""};
        try {
            std::tie(c.passed, c.detail) = body();
        } catch (const std::exception& e) {
            c.detail = std::string("threw ") + e.what();
        }
        out.push_back(c);
    };
    auto shared = [](SurfaceSpec s, int n) { return std::make_shared<const MeshGraph>(discretize(build_surface(s), n)); };

    check("matrix_tree", [&] {
        auto g = shared(SurfaceSpec::rectangle(3, 3), 1);
        long long trees = count_spanning_trees(*g);
        double det = std::exp(log_det_prime(connection_spectrum(trivial_connection(g, 1), 1))) / g->vertex_count();
        return std::pair{trees == 192 && std::llround(det) == trees,
                         "trees=" + std::to_string(trees) + " det'/|V|=" + short_num(det)};
    });
    check("crsf_kenyon", [&] {
        auto g = shared(SurfaceSpec::cylinder(3, 1), 1);
        CMat d = CMat::Zero(2, 2);
        d(0, 0) = {0, 1};
        d(1, 1) = {0, -1};
        auto c = connection_from_holonomy(g, {2, {d}}, default_cuts(SurfaceSpec::cylinder(3, 1)));
        double sum = crsf_weighted_sum(c), det = std::exp(log_det_prime(connection_spectrum(c, 0)));
        bool ok = std::abs(sum - 2.0) < 1e-12 && std::abs(det - 4.0) < 1e-10;
        double worst = 0.0;
        auto g4 = shared(SurfaceSpec::cylinder(4, 1), 1);
        for (int rep = 0; rep < 10; ++rep) {
            auto cr = connection_from_holonomy(g4, {2, {random_unitary(2, rng, true)}},
                                               default_cuts(SurfaceSpec::cylinder(4, 1)));
            auto s = connection_spectrum(cr, std::nullopt);
            if (s.kernel_dim) continue;
            double root = std::exp(0.5 * log_det_prime(s));
            worst = std::max(worst, std::abs(crsf_weighted_sum(cr) - root) / root);
        }
        return std::pair{ok && worst < 1e-9, "C3 sum=" + short_num(sum) + " det=" + short_num(det) +
                                                 " random worst=" + short_num(worst)};
    });
    check("closed_spectra", [&] {
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        const double al = ang(rng), be = ang(rng);
        auto spec = SurfaceSpec::torus(2, 1);
        auto c = connection_from_holonomy(shared(spec, 3), {1, {phase(al), phase(be)}}, default_cuts(spec));
        auto dense = rescale_spectrum(connection_spectrum(c, std::nullopt), 3);
        auto closed = torus_mesh_spectrum(2, 1, 3, al, be);
        double worst = 0.0;
        for (size_t i = 0; i < dense.eigenvalues.size(); ++i)
            worst = std::max(worst, std::abs(dense.eigenvalues[i] - closed.eigenvalues[i]));
        return std::pair{worst < 1e-10, "max deviation " + short_num(worst)};
    });
    check("sin_product", [&] {
        double worst = 0.0;
        for (int m = 1; m <= 16; ++m)
            for (double x : {0.1, 0.5, 1.0, 2.0})
                worst = std::max(worst, std::abs(sin_product(m, x) / sin_product_direct(m, x) - 1.0));
        // area density of the sine-product log-det is the Catalan term
        const int n = 256;
        double density = (rectangle_mesh_logdet(1, 1, n).logdet + 2.0 * log_silver() * n) / (double(n) * n);
        double dev = std::abs(density - 4.0 * catalan() / M_PI);
        return std::pair{worst < 1e-12 && dev < 1e-3,
                         "identity rel err " + short_num(worst) + ", area density off by " + short_num(dev)};
    });
    check("renorm", [&] {
        auto s = convergence_study(Setup{SurfaceSpec::torus(1, 1), 1, {}}, {64, 128, 256});
        double err = std::abs(s.rows.back().renormalized - *s.target);
        return std::pair{err < 1e-4, "torus(1,1) n=256 error " + short_num(err)};
    });
    check("zeta0", [&] {
        auto z = [](SurfaceSpec s, int rank, int h0) { return zeta_zero(geometry_summary(build_surface(s)), rank, h0); };
        bool ok = z(SurfaceSpec::rectangle(1, 1), 1, 1) == Rational{-3, 4} &&
                  z(SurfaceSpec::lshape(), 1, 1) == Rational{-13, 18} &&
                  z(SurfaceSpec::torus(1, 1), 1, 1) == Rational{-1, 1};
        double m = zeta_zero_mellin(ContinuumKind::Rectangle, 1, 1);
        return std::pair{ok && std::abs(m + 0.75) < 1e-6, "mellin " + short_num(m)};
    });
    check("heat_trace", [&] {
        auto ex = heat_expansion(ContinuumKind::Rectangle, 2, 3);
        double worst = 0.0;
        for (double t : {0.02, 0.05, 0.1, 0.2})
            worst = std::max(worst, std::abs(heat_trace(ContinuumKind::Rectangle, 2, 3, t) - ex.evaluate(t)));
        return std::pair{worst < 1e-5, "rectangle(2,3) worst residual " + short_num(worst)};
    });
    check("szego", [&] {
        FourierProfile p{2, 2, {{{1, 0}, 1.0}}};
        double d = szego_trace_direct(p, 4), c = szego_trace_contraction(p, 4);
        double gap = std::abs(szego_trace_direct(p, 64) - szego_expansion_predicted(p, 64));
        return std::pair{std::abs(d - c) < 1e-9 && gap < 0.02,
                         "contraction gap " + short_num(std::abs(d - c)) + ", n=64 expansion gap " + short_num(gap)};
    });
    check("embedding", [&] {
        auto rho = build_bump();
        std::normal_distribution<double> gauss;
        double worst = 0.0;
        auto spec = SurfaceSpec::rectangle(2, 2);
        auto ok = interior_support(spec, 3);
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<double> f(ok.size(), 0.0);
            for (size_t v = 0; v < ok.size(); ++v)
                if (ok[v]) f[v] = gauss(rng);
            auto e = embedding_check(spec, 3, rho, f);
            worst = std::max({worst, std::abs(e.norm_ratio - 1), std::abs(e.form_ratio - 1)});
        }
        double res = *std::max_element(rho.residuals.begin(), rho.residuals.end());
        return std::pair{worst < 1e-7 && res < 1e-10, "ratio deviation " + short_num(worst)};
    });
    check("weyl", [&] {
        std::vector<HermitianSpectrum> specs;
        for (int n = 2; n <= 8; ++n) specs.push_back(torus_mesh_spectrum(1, 1, n, 0, 0));
        auto w = uniform_weyl_check(specs);
        return std::pair{w.c_min > 0, "c_min " + short_num(w.c_min)};
    });
    check("ratio_symmetry", [&] {
        auto r = ratio_study(Setup{SurfaceSpec::rectangle(3, 1), 1, {}}, Setup{SurfaceSpec::rectangle(1, 3), 1, {}}, {4, 8});
        double dev = 0.0;
        for (const auto& row : r.rows) dev = std::max(dev, std::abs(row.ratio - 1.0));
        return std::pair{dev < 1e-12, "max |ratio - 1| " + short_num(dev)};
    });
    return out;
}

}  // namespace tl::cli
