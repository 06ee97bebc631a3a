#include "gngwt/pipeline.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "gngwt/colorize.h"
#include "gngwt/error.h"

namespace gngwt {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(std::string("stage ") + name + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

}  // namespace

void PipelineConfig::validate() const {
    params.validate();
    if (!(t_p > 0) || !std::isfinite(t_p)) throw InvalidArgument("t_p must be a positive length");
    if (!(weld_eps > 0) || !std::isfinite(weld_eps)) throw InvalidArgument("weld_eps must be a positive length");
    if (noise_sigma && (!(*noise_sigma > 0) || !std::isfinite(*noise_sigma))) {
        throw InvalidArgument("noise_sigma must be a positive length");
    }
    if (simplify_target && *simplify_target < 4) throw InvalidArgument("simplify target must be at least 4 faces");
}

PipelineConfig load_params(const std::filesystem::path& path, const PipelineConfig& base) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open parameter file '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ParseError(path.string() + ": parameter file must hold a JSON object");
    }
    static const std::set<std::string> required{"eps_b", "eps_n", "t_gamma", "a_max", "alpha", "d"};
    static const std::set<std::string> optional{"t_p", "weld_eps", "noise_sigma", "simplify_target"};
    for (const auto& [key, value] : j.items()) {
        if (!required.count(key) && !optional.count(key)) {
            throw ParseError(path.string() + ": unknown key '" + key + "'");
        }
        if (!value.is_number()) {
            throw ParseError(path.string() + ": key '" + key + "' must be numeric");
        }
    }
    for (const auto& key : required) {
        if (!j.contains(key)) throw ParseError(path.string() + ": missing key '" + key + "'");
    }

    PipelineConfig config = base;
    config.params.eps_b = j["eps_b"].get<double>();
    config.params.eps_n = j["eps_n"].get<double>();
    config.params.t_gamma = j["t_gamma"].get<double>();
    const double a_max = j["a_max"].get<double>();
    if (a_max != std::floor(a_max)) throw ParseError(path.string() + ": a_max must be an integer");
    config.params.a_max = static_cast<int>(a_max);
    config.params.alpha = j["alpha"].get<double>();
    config.params.d = j["d"].get<double>();
    if (j.contains("t_p")) config.t_p = j["t_p"].get<double>();
    if (j.contains("weld_eps")) config.weld_eps = j["weld_eps"].get<double>();
    if (j.contains("noise_sigma")) config.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("simplify_target")) config.simplify_target = j["simplify_target"].get<std::size_t>();
    config.validate();
    return config;
}

void save_params(const PipelineConfig& config, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["eps_b"] = config.params.eps_b;
    j["eps_n"] = config.params.eps_n;
    j["t_gamma"] = config.params.t_gamma;
    j["a_max"] = config.params.a_max;
    j["alpha"] = config.params.alpha;
    j["d"] = config.params.d;
    j["t_p"] = config.t_p;
    j["weld_eps"] = config.weld_eps;
    if (config.noise_sigma) j["noise_sigma"] = *config.noise_sigma;
    if (config.simplify_target) j["simplify_target"] = *config.simplify_target;
    write_text(path, j.dump(2) + "\n");
}

PipelineResult reconstruct_mesh(const PointCloud& cloud, const PipelineConfig& config) {
    config.validate();
    PipelineResult out;
    const TrainingCloud training = stage("load", [&] { return TrainingCloud(cloud); });
    TrainingOptions options;
    options.noise_sigma = config.noise_sigma;

    ReconstructResult gng = stage("reconstruct", [&] { return reconstruct(training, config.params, config.seed, options); });
    out.trace = gng.trace;
    out.gng_neurons = static_cast<std::size_t>(gng.model.size());
    spdlog::info("reconstruct: {} epochs, {} neurons, {} edges", gng.trace.epochs.size(), gng.model.size(),
                 gng.model.edge_count());

    stage("score", [&] {
        const TriangleMesh raw = extract_faces(gng.model);
        out.gng_faces = raw.faces.size();
        out.scores.epsilon = consistency_error(gng.model, training.index());
        out.scores.eta = raw.faces.empty() ? 1.0 : eta(raw);
        return 0;
    });

    RepairLog& log = out.log;
    stage("remove_close_edges", [&] {
        log.add("remove_close_edges", "edges_removed", remove_close_edges(gng.model, config.t_p));
        return 0;
    });
    stage("complete_quads", [&] {
        log.add("complete_quads", "edges_added", complete_quads(gng.model));
        return 0;
    });
    TriangleMesh mesh = stage("extract_faces", [&] {
        TriangleMesh m = extract_faces(gng.model);
        if (m.faces.empty()) throw TopologyError("graph contains no triangles");
        log.add("extract_faces", "faces", m.faces.size());
        return m;
    });
    stage("extract_manifold", [&] { return extract_manifold(mesh, &log); });
    stage("fill_holes", [&] { return fill_holes(mesh, &log); });
    stage("dedup", [&] { return dedup(mesh, config.weld_eps, &log); });
    stage("orient", [&] { return orient(mesh, &log); });
    if (config.simplify_target) {
        stage("simplify", [&] { return simplify(mesh, *config.simplify_target, &log); });
    }
    if (config.skip_color) {
        mesh.colors.clear();
        log.add("restore_colors", "skipped", 0);
    } else {
        stage("restore_colors", [&] {
            if (!restore_colors(mesh, cloud, training.index(), &log)) {
                spdlog::warn("input cloud has no colors; mesh left uncolored");
            }
            return 0;
        });
    }
    out.report = watertight_report(mesh);
    out.mesh = std::move(mesh);
    return out;
}

PipelineSummary run_pipeline(const PipelineConfig& config, const std::filesystem::path& input,
                             const std::filesystem::path& output,
                             const std::optional<std::filesystem::path>& trace_csv) {
    const PointCloud cloud = stage("load", [&] { return load_ply(input); });
    PipelineSummary summary{reconstruct_mesh(cloud, config), output, {}};
    stage("save", [&] {
        save_mesh(summary.result.mesh, output);
        if (trace_csv) write_text(*trace_csv, summary.result.trace.to_csv());
        return 0;
    });

    std::ostringstream text;
    text.precision(9);
    text << "input: " << input.string() << '\n'
         << "points: " << cloud.size() << '\n'
         << "epochs: " << summary.result.trace.epochs.size() << '\n'
         << "gng_neurons: " << summary.result.gng_neurons << '\n'
         << "gng_faces: " << summary.result.gng_faces << '\n'
         << "epsilon: " << summary.result.scores.epsilon << '\n'
         << "eta: " << summary.result.scores.eta << '\n'
         << summary.result.report.str() << "repair_log:\n";
    for (const auto& line : summary.result.log.lines()) text << "  " << line << '\n';
    text << "epoch_trace:\n";
    std::istringstream trace(summary.result.trace.to_csv());
    for (std::string line; std::getline(trace, line);) text << "  " << line << '\n';
    // Surface mesh ready for an external tetrahedralizer.
    text << "tetrahedralization_input: " << std::filesystem::absolute(output).string() << '\n';
    summary.text = text.str();
    return summary;
}

OptimizeRun optimize_cloud(const PointCloud& cloud, int iterations, std::size_t swarm_size, std::uint64_t seed,
                           const PipelineConfig& base, const SwarmOptions& options) {
    const TrainingCloud training(cloud);
    SwarmOptions opts = options;
    if (base.noise_sigma) opts.training.noise_sigma = base.noise_sigma;
    OptimizeRun run{optimize(training, iterations, swarm_size, seed, opts), base};
    run.config.params = run.result.params;
    return run;
}

void run_optimize(const std::filesystem::path& input, int iterations, std::size_t swarm_size, std::uint64_t seed,
                  const std::filesystem::path& out_params, const std::filesystem::path& out_csv,
                  const PipelineConfig& base) {
    const PointCloud cloud = load_ply(input);
    const OptimizeRun run = optimize_cloud(cloud, iterations, swarm_size, seed, base);
    save_params(run.config, out_params);
    write_text(out_csv, history_csv(run.result.history));
}

WatertightReport run_check(const std::filesystem::path& mesh_path) {
    return watertight_report(load_mesh_ply(mesh_path));
}

void run_synth(double density, std::uint64_t seed, const std::filesystem::path& out_path) {
    save_ply(generate_prototype(density, seed), out_path);
}

}  // namespace gngwt
