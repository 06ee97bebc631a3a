#include "gngwt/pso.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "gngwt/error.h"

namespace gngwt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<QualityScores> evaluate_all(const SwarmState& swarm, const TrainingCloud& cloud,
                                        const SwarmOptions& options) {
    const std::size_t n = swarm.agents.size();
    std::vector<QualityScores> scores(n);
    auto work = [&](std::size_t i) {
        scores[i] = evaluate(decode(swarm.agents[i].position), cloud,
                             evaluation_seed(swarm.seed, swarm.iteration, static_cast<int>(i)), options.training);
    };
    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return scores;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) work(i);
        });
    }
    for (auto& worker : pool) worker.join();
    return scores;
}

}  // namespace

bool ParamSpace::contains(const ParamVector& x) const {
    for (std::size_t k = 0; k < kParamDims; ++k) {
        if (!(x[k] >= low[k] && x[k] <= high[k])) return false;
    }
    return true;
}

void ParamSpace::validate() const {
    for (std::size_t k = 0; k < kParamDims; ++k) {
        if (!(low[k] < high[k])) {
            throw InvalidArgument("ParamSpace: empty range in dimension " + std::to_string(k));
        }
    }
}

ParamVector encode(const GngParams& p) {
    return {p.eps_b, p.eps_n, p.t_gamma, static_cast<double>(p.a_max), p.alpha, p.d};
}

GngParams decode(const ParamVector& x) {
    GngParams p;
    p.eps_b = x[0];
    p.eps_n = std::min(x[1], x[0]);
    p.t_gamma = x[2];
    p.a_max = static_cast<int>(std::lround(x[3]));
    p.alpha = x[4];
    p.d = x[5];
    return p;
}

SwarmState init_swarm(const ParamSpace& space, const GngParams& seed_params, std::size_t swarm_size,
                      std::uint64_t seed, const SwarmOptions& options) {
    space.validate();
    if (swarm_size < 1) {
        throw InvalidArgument("init_swarm: swarm needs at least one agent");
    }
    const ParamVector origin = encode(seed_params);
    if (!space.contains(origin)) {
        throw InvalidArgument("init_swarm: seed parameters lie outside the search space");
    }

    SwarmState swarm;
    swarm.space = space;
    swarm.seed = seed;
    swarm.motion_rng.seed(splitmix64(seed ^ 0x5053'4F5F'4D4F'5645ULL));
    Rng init_rng(splitmix64(seed));
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    swarm.agents.resize(swarm_size);
    for (std::size_t i = 0; i < swarm_size; ++i) {
        Agent& agent = swarm.agents[i];
        for (std::size_t k = 0; k < kParamDims; ++k) {
            const double offset = options.position_spread * space.range(k) * sym(init_rng);
            const double velocity = options.velocity_spread * space.range(k) * sym(init_rng);
            agent.position[k] = i == 0 ? origin[k] : std::clamp(origin[k] + offset, space.low[k], space.high[k]);
            agent.velocity[k] = velocity;
        }
        agent.best_position = agent.position;
    }
    swarm.global_best = swarm.agents[0].position;
    return swarm;
}

std::uint64_t evaluation_seed(std::uint64_t run_seed, int iteration, int agent) {
    std::uint64_t h = splitmix64(run_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(iteration)));
    return splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(agent)) << 32));
}

QualityScores evaluate(const GngParams& params, const TrainingCloud& cloud, std::uint64_t seed,
                       const TrainingOptions& options) {
    try {
        const ReconstructResult result = reconstruct(cloud, params, seed, options);
        if (result.model.size() < 3) return QualityScores::failure();
        const TriangleMesh faces = extract_faces(result.model);
        if (faces.faces.empty()) return QualityScores::failure();
        return {consistency_error(result.model, cloud.index()), eta(faces)};
    } catch (const GngFailure&) {
        return QualityScores::failure();
    } catch (const InvalidArgument&) {
        return QualityScores::failure();
    }
}

void record_scores(SwarmState& swarm, const std::vector<QualityScores>& scores) {
    if (scores.size() != swarm.agents.size()) {
        throw InvalidArgument("record_scores: one score per agent expected");
    }
    bool improved = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        Agent& agent = swarm.agents[i];
        if (theta(agent.best_scores, scores[i])) {
            agent.best_scores = scores[i];
            agent.best_position = agent.position;
        }
        if (theta(swarm.global_best_scores, scores[i])) {
            swarm.global_best_scores = scores[i];
            swarm.global_best = agent.position;
            swarm.global_best_iteration = swarm.iteration;
            swarm.global_best_agent = static_cast<int>(i);
            improved = true;
        }
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool incumbent = improved && swarm.global_best_agent == static_cast<int>(i);
        swarm.history.push_back({swarm.iteration, static_cast<int>(i), scores[i], incumbent});
    }
    swarm.best_per_iteration.push_back(swarm.global_best_scores);
}

void move_agents(SwarmState& swarm, const PsoCoefficients& c, const std::function<double()>& uniform01) {
    for (Agent& agent : swarm.agents) {
        for (std::size_t k = 0; k < kParamDims; ++k) {
            const double r1 = uniform01();
            const double r2 = uniform01();
            double v = c.inertia * agent.velocity[k] + c.cognitive * r1 * (agent.best_position[k] - agent.position[k]) +
                       c.social * r2 * (swarm.global_best[k] - agent.position[k]);
            double x = agent.position[k] + v;
            if (x < swarm.space.low[k] || x > swarm.space.high[k]) {
                x = std::clamp(x, swarm.space.low[k], swarm.space.high[k]);
                v = 0.0;
            }
            agent.position[k] = x;
            agent.velocity[k] = v;
        }
    }
}

void step(SwarmState& swarm, const TrainingCloud& cloud, const SwarmOptions& options) {
    record_scores(swarm, evaluate_all(swarm, cloud, options));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    move_agents(swarm, options.coefficients, [&] { return unit(swarm.motion_rng); });
    ++swarm.iteration;
}

OptimizeResult optimize(const TrainingCloud& cloud, int iterations, std::size_t swarm_size, std::uint64_t seed,
                        const SwarmOptions& options, const GngParams& seed_params) {
    if (iterations < 1) {
        throw InvalidArgument("optimize: at least one iteration required");
    }
    SwarmState swarm = init_swarm(ParamSpace{}, seed_params, swarm_size, seed, options);
    for (int it = 0; it < iterations; ++it) {
        step(swarm, cloud, options);
    }
    return {decode(swarm.global_best), swarm.global_best_scores, std::move(swarm.history),
            std::move(swarm.best_per_iteration)};
}

std::string history_csv(const std::vector<HistoryRow>& history) {
    std::ostringstream out;
    out << "iteration,agent,epsilon,eta,is_global_best\n";
    out.precision(17);
    for (const HistoryRow& row : history) {
        out << row.iteration << ',' << row.agent << ',' << row.scores.epsilon << ',' << row.scores.eta << ','
            << (row.is_global_best ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace gngwt
