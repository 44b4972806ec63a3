#include "epred/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Lattice Euler-Poincare reduction on trivial bundles"};
    app.require_subcommand(1);

    std::string config, outdir;
    auto* sim = app.add_subcommand("simulate", "Run one simulation and write series.csv, snapshots and report.json");
    sim->add_option("config", config, "JSON config")->required();
    sim->add_option("outdir", outdir, "Output directory")->required();

    epred::cli::VerifyOptions vopts;
    auto* ver = app.add_subcommand("verify", "Run the property suite");
    ver->add_option("--seed", vopts.seed, "Random seed");
    ver->add_option("--sizes", vopts.sizes, "Lattice sizes (1-D N and 2-D NxN each)");
    ver->add_flag("--mutate-flip-dgamma", vopts.flip_gamma_derivative)->group("");

    std::string conv_config, conv_outdir = ".";
    auto* conv = app.add_subcommand("convergence", "Run a refinement ladder and write orders.json");
    conv->add_option("config", conv_config, "JSON config with a convergence section")->required();
    conv->add_option("outdir", conv_outdir, "Output directory (default: current directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : epred::cli::kExitConfig;
    }

    try {
        if (*sim) return epred::cli::run_simulate(config, outdir, std::cout, std::cerr);
        if (*ver) return epred::cli::run_verify(vopts, std::cout);
        if (*conv) return epred::cli::run_convergence(conv_config, conv_outdir, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return epred::cli::kExitFailed;
    }
    return epred::cli::kExitFailed;
}
