#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "torsionlab/connection.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/surface.hpp"

namespace tl::cli {

enum class ExperimentKind {
    Spectrum,
    LogDet,
    RenormSeries,
    Ratio,
    CrsfVerify,
    Szego,
    HeatTrace,
    Zeta0,
    Torsion,
    WeylCheck,
    EmbeddingCheck,
};
const char* kind_name(ExperimentKind k);

// Exactly one of: trivial rank r, U(1) phases, explicit holonomy matrices,
// or seeded random holonomies ("u1", "su2", "su2-commuting").
struct BundleSpec {
    int rank = 1;
    std::vector<double> phases;
    std::vector<CMat> holonomy;
    std::string random;
    int count = 1;  // random representations per n
};

struct WeylSlope {
    int n = 64;
    int lo = 50;
    int hi = 200;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Spectrum;
    SurfaceSpec surface;
    BundleSpec bundle;
    std::optional<SurfaceSpec> surface_b;
    std::optional<BundleSpec> bundle_b;
    std::vector<int> n_list;
    std::vector<double> t_list;
    std::map<std::pair<int, int>, double> profile;
    std::optional<WeylSlope> weyl_slope;
    int samples = 100;
    std::string output;  // CSV file name inside the output directory
    std::optional<std::uint64_t> seed;
    double kernel_tol = 1e-8;
    double identity_tol = 1e-9;
    nlohmann::ordered_json raw;
};

// throws Error(ConfigError) on anything missing or malformed
ExperimentConfig parse_config(const nlohmann::ordered_json& j);
ExperimentConfig load_config(const std::filesystem::path& p);

struct PlotSeries {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::pair<double, double>> points;
};

struct Artifacts {
    std::map<std::string, std::string> files;  // name -> contents
    std::vector<std::string> report;           // lines for stdout
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    std::optional<PlotSeries> plot;
};

Artifacts execute(const ExperimentConfig& cfg, std::uint64_t seed, int threads);

// 0 ok, 2 validation, 3 numerical budget, 1 other numerical failure
int exit_code_for(ErrorCode c);

void write_atomic(const std::filesystem::path& p, const std::string& contents);
std::string svg_plot(const PlotSeries& s);

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool plot = false;
};
// --threads, then TORSIONLAB_THREADS, then 1
int resolve_threads(std::optional<int> flag);
int run(const RunOptions& opt, std::ostream& out, std::ostream& err);

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};
// catalan_fault replaces Catalan's constant for the duration of the run
std::vector<SelftestCheck> selftest(std::uint64_t seed, std::optional<double> catalan_fault = std::nullopt);

}  // namespace tl::cli
