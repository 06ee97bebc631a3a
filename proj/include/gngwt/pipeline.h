#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gngwt/cloud_io.h"
#include "gngwt/gng.h"
#include "gngwt/mesh_ops.h"
#include "gngwt/pso.h"
#include "gngwt/quality.h"

namespace gngwt {

struct PipelineConfig {
    GngParams params = GngParams::seed();
    double t_p = 0.0075;       // meters
    double weld_eps = 1e-6;    // meters
    std::optional<std::size_t> simplify_target;
    bool skip_color = false;
    std::uint64_t seed = 1;
    std::optional<double> noise_sigma;  // meters

    /// Throws InvalidArgument for non-positive thresholds or out-of-range parameters.
    void validate() const;
};

/// Reads a JSON parameter file. The six GNG keys (eps_b, eps_n, t_gamma, a_max, alpha, d)
/// are required; t_p, weld_eps, noise_sigma and simplify_target are optional. Unknown keys
/// are rejected.
PipelineConfig load_params(const std::filesystem::path& path, const PipelineConfig& base = {});
void save_params(const PipelineConfig& config, const std::filesystem::path& path);

struct PipelineResult {
    TriangleMesh mesh;
    WatertightReport report;
    QualityScores scores;  // consistency error of the model, eta of its raw faces
    EpochTrace trace;
    RepairLog log;
    std::size_t gng_neurons = 0;
    std::size_t gng_faces = 0;
};

/// Reconstruction, close-edge removal, face extraction, manifold patch extraction, hole
/// filling, deduplication, orientation, optional simplification and color restoration.
PipelineResult reconstruct_mesh(const PointCloud& cloud, const PipelineConfig& config);

struct PipelineSummary {
    PipelineResult result;
    std::filesystem::path output;
    std::string text;  // human-readable summary
};

/// Loads the cloud, runs reconstruct_mesh and writes the mesh (PLY or OBJ by extension).
/// When `trace_csv` is given, the epoch trace is written there.
PipelineSummary run_pipeline(const PipelineConfig& config, const std::filesystem::path& input,
                             const std::filesystem::path& output,
                             const std::optional<std::filesystem::path>& trace_csv = std::nullopt);

struct OptimizeRun {
    OptimizeResult result;
    PipelineConfig config;  // optimized parameters with the base thresholds
};

void run_optimize(const std::filesystem::path& input, int iterations, std::size_t swarm_size, std::uint64_t seed,
                  const std::filesystem::path& out_params, const std::filesystem::path& out_csv,
                  const PipelineConfig& base = {});
OptimizeRun optimize_cloud(const PointCloud& cloud, int iterations, std::size_t swarm_size, std::uint64_t seed,
                           const PipelineConfig& base = {}, const SwarmOptions& options = {});

WatertightReport run_check(const std::filesystem::path& mesh_path);
void run_synth(double density, std::uint64_t seed, const std::filesystem::path& out_path);

}  // namespace gngwt
