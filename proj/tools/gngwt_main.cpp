#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "gngwt/error.h"
#include "gngwt/log.h"
#include "gngwt/pipeline.h"

namespace {

struct Options {
    std::string input;
    std::string output;
    std::string params;
    std::string csv;
    std::string trace;
    std::optional<double> t_p;
    std::optional<double> weld_eps;
    std::optional<std::size_t> simplify;
    bool skip_color = false;
    std::uint64_t seed = 1;
    int iterations = 100;
    std::size_t swarm_size = 20;
    double density = 2500.0;
};

gngwt::PipelineConfig make_config(const Options& o) {
    gngwt::PipelineConfig config;
    if (!o.params.empty()) config = gngwt::load_params(o.params);
    if (o.t_p) config.t_p = *o.t_p;
    if (o.weld_eps) config.weld_eps = *o.weld_eps;
    if (o.simplify) config.simplify_target = *o.simplify;
    config.skip_color = o.skip_color;
    config.seed = o.seed;
    config.validate();
    return config;
}

int reconstruct(const Options& o) {
    std::optional<std::filesystem::path> trace;
    if (!o.trace.empty()) trace = o.trace;
    const auto summary = gngwt::run_pipeline(make_config(o), o.input, o.output, trace);
    std::cout << summary.text;
    return summary.result.report.watertight() ? 0 : 1;
}

int optimize(const Options& o) {
    gngwt::run_optimize(o.input, o.iterations, o.swarm_size, o.seed, o.output, o.csv, make_config(o));
    std::cout << "params: " << o.output << "\nhistory: " << o.csv << '\n';
    return 0;
}

int check(const Options& o) {
    const auto report = gngwt::run_check(o.input);
    std::cout << report.str();
    return report.watertight() ? 0 : 1;
}

int synth(const Options& o) {
    gngwt::run_synth(o.density, o.seed, o.output);
    std::cout << "wrote " << o.output << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    gngwt::configure_logging_from_env();
    CLI::App app{"Watertight mesh reconstruction from point clouds with growing neural gas"};
    app.require_subcommand(1);
    Options o;

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a watertight mesh from a PLY point cloud");
    rec->add_option("-i,--input", o.input, "Input point cloud (.ply)")->required();
    rec->add_option("-o,--output", o.output, "Output mesh (.ply or .obj)")->required();
    rec->add_option("-p,--params", o.params, "JSON parameter file");
    rec->add_option("--tp", o.t_p, "Close-edge removal threshold in meters");
    rec->add_option("--weld-eps", o.weld_eps, "Vertex weld distance in meters");
    rec->add_option("--simplify", o.simplify, "Target face count");
    rec->add_flag("--skip-color", o.skip_color, "Do not transfer colors");
    rec->add_option("--seed", o.seed, "Random seed");
    rec->add_option("--trace", o.trace, "Write the epoch trace as CSV");

    auto* opt = app.add_subcommand("optimize", "Search GNG parameters with particle swarm optimization");
    opt->add_option("-i,--input", o.input, "Input point cloud (.ply)")->required();
    opt->add_option("-o,--output", o.output, "Output parameter file (.json)")->required();
    opt->add_option("--csv", o.csv, "Per-evaluation history (.csv)")->required();
    opt->add_option("-p,--params", o.params, "Base parameter file for thresholds");
    opt->add_option("--iterations", o.iterations, "Swarm iterations")->check(CLI::PositiveNumber);
    opt->add_option("--swarm-size", o.swarm_size, "Number of agents")->check(CLI::PositiveNumber);
    opt->add_option("--seed", o.seed, "Random seed");

    auto* chk = app.add_subcommand("check", "Report watertightness of a PLY mesh");
    chk->add_option("-i,--input", o.input, "Mesh (.ply)")->required();

    auto* syn = app.add_subcommand("synth", "Sample the cuboid/sphere/torus prototype");
    syn->add_option("-o,--output", o.output, "Output point cloud (.ply)")->required();
    syn->add_option("--density", o.density, "Samples per square meter")->check(CLI::PositiveNumber);
    syn->add_option("--seed", o.seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*rec) return reconstruct(o);
        if (*opt) return optimize(o);
        if (*chk) return check(o);
        return synth(o);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
