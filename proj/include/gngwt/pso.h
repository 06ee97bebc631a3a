#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gngwt/gng.h"
#include "gngwt/quality.h"

namespace gngwt {

/// Search dimensions in the order eps_b, eps_n, t_gamma, a_max, alpha, d.
inline constexpr std::size_t kParamDims = 6;
using ParamVector = std::array<double, kParamDims>;

struct ParamSpace {
    ParamVector low{0.0, 0.0, 0.0, 50.0, 0.0, 0.0};
    ParamVector high{1.0, 0.2, 5.0, 250.0, 1.0, 1.0};

    double range(std::size_t dim) const { return high[dim] - low[dim]; }
    bool contains(const ParamVector& x) const;
    /// Throws InvalidArgument unless low < high in every dimension.
    void validate() const;
};

ParamVector encode(const GngParams& params);
/// a_max is rounded to the nearest integer and eps_n is capped at eps_b.
GngParams decode(const ParamVector& position);

struct Agent {
    ParamVector position{};
    ParamVector velocity{};
    ParamVector best_position{};
    QualityScores best_scores = QualityScores::failure();
};

struct HistoryRow {
    int iteration = 0;
    int agent = 0;
    QualityScores scores;
    bool is_global_best = false;
};

struct PsoCoefficients {
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
};

struct SwarmOptions {
    double position_spread = 0.25;  // initial offsets, as a fraction of each dimension's range
    double velocity_spread = 0.10;
    PsoCoefficients coefficients;
    TrainingOptions training;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct SwarmState {
    ParamSpace space;
    std::vector<Agent> agents;
    ParamVector global_best{};
    QualityScores global_best_scores = QualityScores::failure();
    int global_best_iteration = -1;
    int global_best_agent = 0;
    int iteration = 0;
    std::uint64_t seed = 0;
    std::vector<HistoryRow> history;
    std::vector<QualityScores> best_per_iteration;  // incumbent after each iteration
    Rng motion_rng;
};

/// Agent 0 sits exactly on `seed_params`; the others are spread uniformly around it.
SwarmState init_swarm(const ParamSpace& space, const GngParams& seed_params, std::size_t swarm_size,
                      std::uint64_t seed, const SwarmOptions& options = {});

/// Independent seed for one evaluation of agent `agent` at iteration `iteration`.
std::uint64_t evaluation_seed(std::uint64_t run_seed, int iteration, int agent);

/// Trains a model with `params` and scores it; failures map to QualityScores::failure().
QualityScores evaluate(const GngParams& params, const TrainingCloud& cloud, std::uint64_t seed,
                       const TrainingOptions& options = {});

/// Applies one iteration's scores: personal and global bests are replaced only by
/// theta-dominating candidates, and history rows are appended.
void record_scores(SwarmState& swarm, const std::vector<QualityScores>& scores);

/// Velocity and position update with per-dimension uniform draws from `uniform01`.
/// Positions are clamped to the space; clamped dimensions lose their velocity.
void move_agents(SwarmState& swarm, const PsoCoefficients& coefficients, const std::function<double()>& uniform01);

/// Evaluates every agent (in parallel), records the scores and moves the swarm.
void step(SwarmState& swarm, const TrainingCloud& cloud, const SwarmOptions& options = {});

struct OptimizeResult {
    GngParams params;
    QualityScores scores;
    std::vector<HistoryRow> history;
    std::vector<QualityScores> best_per_iteration;
};

OptimizeResult optimize(const TrainingCloud& cloud, int iterations, std::size_t swarm_size, std::uint64_t seed,
                        const SwarmOptions& options = {}, const GngParams& seed_params = GngParams::seed());

/// "iteration,agent,epsilon,eta,is_global_best" header plus one row per evaluation.
std::string history_csv(const std::vector<HistoryRow>& history);

}  // namespace gngwt
