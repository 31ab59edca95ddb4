#include <iostream>

#include "CLI11.hpp"
#include "torsionlab/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"torsionlab: discrete and continuum determinants on square-tiled surfaces"};
    tl::cli::RunOptions opt;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", opt.config, "experiment config (JSON)");
    app.add_option("--out", opt.out, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "random seed, overrides the config");
    app.add_option("--threads", threads, "worker threads (fallback: TORSIONLAB_THREADS)")->check(CLI::PositiveNumber);
    app.add_flag("--plot", opt.plot, "write plot.svg with the error curve");

    auto* st = app.add_subcommand("selftest", "run the invariant suite at small sizes");
    std::string fault;
    st->add_option("--inject-fault", fault, "corrupt a constant to check the suite notices (catalan)")
        ->check(CLI::IsMember({"catalan"}));
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (st->parsed()) {
        std::optional<double> corrupt;
        if (fault == "catalan") corrupt = 0.9;
        auto checks = tl::cli::selftest(seed.value_or(1), corrupt);
        int failed = 0;
        for (const auto& c : checks) {
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
            failed += !c.passed;
        }
        std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
        return failed ? 1 : 0;
    }
    if (opt.config.empty()) {
        std::cerr << "--config is required\n" << app.help();
        return 2;
    }
    opt.seed = seed;
    opt.threads = threads;
    return tl::cli::run(opt, std::cout, std::cerr);
}
