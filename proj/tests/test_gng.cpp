#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "fixtures.h"
#include "gngwt/error.h"
#include "gngwt/gng.h"

using namespace gngwt;

namespace {

GngParams seed_params() { return GngParams{0.2, 0.006, 3.0, 60, 0.5, 0.995}; }

double brute_consistency(const GngModel& m, const std::vector<Vec3>& cloud) {
    double sum = 0;
    for (int i = 0; i < m.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& p : cloud) best = std::min(best, (m.position(i) - p).norm());
        sum += best;
    }
    return sum / m.size();
}

int components(const GngModel& m) {
    std::vector<int> seen(m.size(), 0);
    int count = 0;
    for (int s = 0; s < m.size(); ++s) {
        if (seen[s]) continue;
        ++count;
        std::queue<int> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (const EdgeRef& e : m.neighbors(v)) {
                if (!seen[e.to]) {
                    seen[e.to] = 1;
                    q.push(e.to);
                }
            }
        }
    }
    return count;
}

PointCloud two_points() {
    PointCloud c;
    c.points = {{0, 0, 0}, {1, 0, 0}};
    return c;
}

}  // namespace

TEST(GngParams, SeedColumnAndValidation) {
    const GngParams p = GngParams::seed();
    EXPECT_EQ(p.eps_b, 0.2);
    EXPECT_EQ(p.eps_n, 0.006);
    EXPECT_EQ(p.t_gamma, 3.0);
    EXPECT_EQ(p.a_max, 60);
    EXPECT_EQ(p.alpha, 0.5);
    EXPECT_EQ(p.d, 0.995);
    EXPECT_NO_THROW(p.validate());
    EXPECT_NO_THROW(GngParams::published_optimum().validate());
    GngParams bad = p;
    bad.eps_n = 0.3;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = p;
    bad.a_max = 40;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = p;
    bad.eps_b = 0.001;
    EXPECT_THROW(bad.validate(), InvalidArgument);  // eps_n > eps_b
}

TEST(InitModel, TwoPointCloud) {
    const GngModel m = init_model(two_points(), 5);
    ASSERT_EQ(m.size(), 2);
    EXPECT_EQ(m.edge_count(), 1u);
    EXPECT_EQ(m.edge_age(0, 1), 0);
    EXPECT_NE(m.position(0), m.position(1));
    for (int i = 0; i < 2; ++i) {
        EXPECT_TRUE(m.position(i) == Vec3(0, 0, 0) || m.position(i) == Vec3(1, 0, 0));
        EXPECT_EQ(m.error(i), 0.0);
    }
}

TEST(InitModel, DeterministicAndMembers) {
    const PointCloud c = fixtures::sample_unit_sphere(10000, 3);
    const GngModel a = init_model(c, 17);
    const GngModel b = init_model(c, 17);
    EXPECT_TRUE(a == b);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NE(std::find(c.points.begin(), c.points.end(), a.position(i)), c.points.end());
    }
}

TEST(InitModel, TooSmall) {
    PointCloud c;
    c.points = {{0, 0, 0}};
    EXPECT_THROW(init_model(c, 1), InvalidArgument);
    c.points = {{0, 0, 0}, {0, 0, 0}};
    EXPECT_THROW(init_model(c, 1), InvalidArgument);
}

// Scalar hand simulation of one step, including edge expiry, isolated-neuron removal and
// threshold insertion.
TEST(PresentSignal, HandSimulatedStep) {
    GngModel m;
    m.add_neuron({0, 0, 0}, 2.95);
    m.add_neuron({1, 0, 0}, 1.0);
    m.add_neuron({0, 1, 0}, 0.5);
    m.connect(0, 1);
    m.set_edge_age(0, 1, 5);
    m.connect(0, 2);
    m.set_edge_age(0, 2, 60);
    const Vec3 s(0.3, 0.1, 0.0);

    // (1) w1 = 0 (d^2 = 0.1), w2 = 1 (0.5), neuron 2 at 0.9
    // (2) e0 = 2.95 + 0.1
    double e0 = 2.95 + (0.3 * 0.3 + 0.1 * 0.1);
    double e1 = 1.0;
    // (3) moves
    const double x0 = 0.0 + 0.2 * 0.3, y0 = 0.0 + 0.2 * 0.1;
    const double x1 = 1.0 + 0.006 * (0.3 - 1.0), y1 = 0.0 + 0.006 * 0.1;
    // (4) ages 6 and 61, (5) edge 0-1 reset to 0, (6) edge 0-2 expires and neuron 2 is isolated
    // (7) e0 > 3: new neuron at the midpoint of 0 and its only neighbor 1
    e0 *= 0.5;
    e1 *= 0.5;
    const double er = e0;
    // (8) decay
    e0 *= 0.995;
    e1 *= 0.995;
    const double er_final = er * 0.995;

    EXPECT_TRUE(present_signal(m, seed_params(), s));
    ASSERT_EQ(m.size(), 3);
    EXPECT_NEAR(m.position(0).x(), x0, 1e-15);
    EXPECT_NEAR(m.position(0).y(), y0, 1e-15);
    EXPECT_NEAR(m.position(1).x(), x1, 1e-15);
    EXPECT_NEAR(m.position(1).y(), y1, 1e-15);
    EXPECT_NEAR(m.position(2).x(), 0.5 * (x0 + x1), 1e-15);
    EXPECT_NEAR(m.position(2).y(), 0.5 * (y0 + y1), 1e-15);
    EXPECT_NEAR(m.error(0), e0, 1e-14);
    EXPECT_NEAR(m.error(1), e1, 1e-14);
    EXPECT_NEAR(m.error(2), er_final, 1e-14);
    EXPECT_FALSE(m.connected(0, 1));
    EXPECT_TRUE(m.connected(0, 2));
    EXPECT_TRUE(m.connected(2, 1));
    EXPECT_EQ(m.edge_count(), 2u);
    EXPECT_EQ(m.insertions(), 1u);
    m.check_invariants();
}

TEST(PresentSignal, HandSimulatedStepWithoutInsertion) {
    GngModel m;
    m.add_neuron({0, 0, 0}, 0.25);
    m.add_neuron({1, 0, 0}, 0.5);
    m.add_neuron({0, 2, 0}, 0.75);
    m.connect(0, 1);
    m.connect(1, 2);
    m.set_edge_age(1, 2, 7);
    const Vec3 s(0.9, 0.3, 0.0);
    // w1 = 1 (d^2 = 0.01 + 0.09), w2 = 0 (0.81 + 0.09); neighbors of 1 are 0 and 2
    const double e1 = (0.5 + 0.1) * 0.995;
    EXPECT_FALSE(present_signal(m, seed_params(), s));
    EXPECT_NEAR(m.position(1).x(), 1.0 + 0.2 * (0.9 - 1.0), 1e-15);
    EXPECT_NEAR(m.position(1).y(), 0.2 * 0.3, 1e-15);
    EXPECT_NEAR(m.position(0).x(), 0.006 * 0.9, 1e-15);
    EXPECT_NEAR(m.position(2).y(), 2.0 + 0.006 * (0.3 - 2.0), 1e-15);
    EXPECT_NEAR(m.position(2).x(), 0.006 * 0.9, 1e-15);
    EXPECT_NEAR(m.error(1), e1, 1e-15);
    EXPECT_NEAR(m.error(0), 0.25 * 0.995, 1e-15);
    EXPECT_NEAR(m.error(2), 0.75 * 0.995, 1e-15);
    EXPECT_EQ(m.edge_age(0, 1), 0);
    EXPECT_EQ(m.edge_age(1, 2), 8);
}

TEST(PresentSignal, SignalOnWinner) {
    GngModel m;
    m.add_neuron({0, 0, 0}, 1.0);
    m.add_neuron({1, 0, 0}, 0.0);
    m.connect(0, 1);
    present_signal(m, seed_params(), {0, 0, 0});
    EXPECT_EQ(m.position(0), Vec3(0, 0, 0));
    EXPECT_DOUBLE_EQ(m.error(0), 0.995);
}

TEST(PresentSignal, FullStepLandsOnSignal) {
    GngModel m;
    m.add_neuron({0, 0, 0});
    m.add_neuron({1, 0, 0});
    m.connect(0, 1);
    GngParams p = seed_params();
    p.eps_b = 1.0;
    present_signal(m, p, {0.2, 0.3, -0.1});
    EXPECT_EQ(m.position(0), Vec3(0.2, 0.3, -0.1));
}

TEST(PresentSignal, NeedsTwoNeurons) {
    GngModel m;
    m.add_neuron({0, 0, 0});
    EXPECT_THROW(present_signal(m, seed_params(), {1, 1, 1}), GngFailure);
}

TEST(PresentSignal, FuzzKeepsInvariants) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    GngModel m;
    m.add_neuron({0.2, 0.2, 0.2});
    m.add_neuron({0.8, 0.8, 0.8});
    m.connect(0, 1);
    GngParams p{0.3, 0.05, 0.05, 50, 0.5, 0.99};
    for (int step = 0; step < 100000; ++step) {
        present_signal(m, p, {u(rng), u(rng), 0.1 * u(rng)});
        if (step % 97 == 0 || step > 99000) m.check_invariants();
        ASSERT_GE(m.size(), 2);
        ASSERT_LE(static_cast<std::size_t>(m.size()), 2 + m.insertions());
    }
    m.check_invariants();
    EXPECT_GT(m.insertions(), 10u);
}

TEST(PresentSignal, NoInsertionBelowThreshold) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 0.01);
    GngModel m;
    m.add_neuron({0, 0, 0});
    m.add_neuron({1, 0, 0});
    m.connect(0, 1);
    GngParams p = seed_params();
    p.t_gamma = 5.0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 base = i % 2 ? Vec3(0, 0, 0) : Vec3(1, 0, 0);
        EXPECT_FALSE(present_signal(m, p, base + Vec3(g(rng), g(rng), g(rng))));
    }
    EXPECT_EQ(m.insertions(), 0u);
    EXPECT_EQ(m.size(), 2);
}

TEST(PresentSignal, IdleErrorDecaysMonotonically) {
    GngModel m;
    m.add_neuron({0, 0, 0});
    m.add_neuron({0.1, 0, 0});
    m.add_neuron({5, 5, 5}, 4.0);
    m.connect(0, 1);
    double last = m.error(2);
    for (int i = 0; i < 4000; ++i) {
        present_signal(m, seed_params(), {0.01 * (i % 3), 0, 0});
        ASSERT_EQ(m.position(2), Vec3(5, 5, 5));
        ASSERT_LT(m.error(2), last);
        last = m.error(2);
    }
    EXPECT_LT(last, 1e-6);
}

TEST(NearestTwo, GridMatchesLinearScan) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    GngModel plain;
    for (int i = 0; i < 300; ++i) plain.add_neuron(Vec3(u(rng), u(rng), 0.3 * u(rng)));
    plain.add_neuron(Vec3(1e9, 0, 0));  // outside the packable cell range
    plain.add_neuron(Vec3(0.5, 0.5, 0));
    plain.add_neuron(Vec3(0.5, 0.5, 0));  // exact duplicate: tie
    GngModel gridded = plain;
    gridded.enable_grid(0.07);
    for (int round = 0; round < 5; ++round) {
        for (int q = 0; q < 2000; ++q) {
            const Vec3 p = q % 7 == 0 ? Vec3(0.5, 0.5, 0) : Vec3(2 * u(rng), 2 * u(rng), u(rng));
            ASSERT_EQ(gridded.nearest_two(p), plain.nearest_two(p));
        }
        for (int k = 0; k < 40; ++k) {
            const int i = static_cast<int>(u(rng) * 100 + 100);
            const Vec3 to(u(rng), u(rng), u(rng));
            plain.set_position(i, to);
            gridded.set_position(i, to);
        }
        plain.remove_neuron(round * 3);
        gridded.remove_neuron(round * 3);
    }
}

TEST(ConsistencyError, Examples) {
    PointCloud c;
    c.points = {{1, 0, 0}, {0, 2, 0}};
    GngModel m;
    m.add_neuron({0, 0, 0});
    EXPECT_DOUBLE_EQ(consistency_error(m, SpatialIndex(c)), 1.0);

    GngModel on;
    on.add_neuron({1, 0, 0});
    on.add_neuron({0, 2, 0});
    EXPECT_EQ(consistency_error(on, SpatialIndex(c)), 0.0);

    EXPECT_THROW(consistency_error(GngModel(), SpatialIndex(c)), InvalidArgument);
}

TEST(ConsistencyError, MatchesBruteForce) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        PointCloud c;
        for (int i = 0; i < 300; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
        GngModel m;
        for (int i = 0; i < 50; ++i) m.add_neuron(Vec3(u(rng), u(rng), u(rng)));
        const double a = consistency_error(m, SpatialIndex(c));
        const double b = brute_consistency(m, c.points);
        EXPECT_LE(std::abs(a - b), 1e-12 * b);
    }
}

TEST(TrainEpoch, FixedPointWithoutNoise) {
    // Neighbors stay put when eps_n = 0, so both neurons remain on the two points.
    const TrainingCloud cloud(two_points());
    GngModel m;
    m.add_neuron({0, 0, 0});
    m.add_neuron({1, 0, 0});
    m.connect(0, 1);
    GngParams p = seed_params();
    p.eps_n = 0.0;
    Rng rng(1);
    train_epoch(m, p, cloud, 0.0, rng);
    EXPECT_EQ(consistency_error(m, cloud.index()), 0.0);
}

TEST(TrainEpoch, RemovesDivertedNeuron) {
    const PointCloud c = fixtures::sample_unit_sphere(2000, 1);
    const TrainingCloud cloud(c);
    GngModel m = init_model(c, 3);
    const int far = m.add_neuron(Vec3(100 * cloud.diagonal(), 0, 0));
    m.connect(0, far);
    Rng rng(2);
    train_epoch(m, seed_params(), cloud, 0.0, rng);
    for (int i = 0; i < m.size(); ++i) EXPECT_LT(m.position(i).norm(), 10.0);
    m.check_invariants();
}

TEST(TrainEpoch, DeterministicForSeed) {
    const TrainingCloud cloud(fixtures::sample_unit_sphere(3000, 1));
    auto run = [&] {
        GngModel m = init_model(cloud.cloud(), 9);
        Rng rng(10);
        train_epoch(m, seed_params(), cloud, 0.01, rng);
        return m;
    };
    EXPECT_TRUE(run() == run());
}

TEST(TrainEpoch, NeuronBudget) {
    const TrainingCloud cloud(fixtures::sample_unit_sphere(3000, 1));
    GngModel m = init_model(cloud.cloud(), 9, cloud.diagonal() / 20);
    TrainingOptions o;
    o.neuron_budget = 20;
    Rng rng(10);
    EXPECT_THROW(train_epoch(m, seed_params(), cloud, 0.0, rng, o), GngFailure);
}

TEST(Reconstruct, StopsAtFirstIncrease) {
    const TrainingCloud cloud(fixtures::sample_unit_sphere(5000, 2));
    const ReconstructResult r = reconstruct(cloud, seed_params(), 3);
    const auto& e = r.trace.epochs;
    ASSERT_GE(e.size(), 2u);
    for (std::size_t i = 1; i + 1 < e.size(); ++i) EXPECT_LT(e[i].epsilon, e[i - 1].epsilon);
    EXPECT_TRUE(r.converged);
    EXPECT_GT(e.back().epsilon, e[e.size() - 2].epsilon);
    EXPECT_EQ(r.best_epoch, static_cast<int>(e.size()) - 1);
    EXPECT_DOUBLE_EQ(consistency_error(r.model, cloud.index()), e[r.best_epoch - 1].epsilon);
    for (const EpochRecord& rec : e) EXPECT_GT(rec.epsilon, 0.0);
}

TEST(Reconstruct, EpochCapReturnsBestSoFar) {
    const TrainingCloud cloud(fixtures::sample_unit_sphere(2000, 2));
    TrainingOptions o;
    o.max_epochs = 1;
    const ReconstructResult r = reconstruct(cloud, seed_params(), 3, o);
    EXPECT_EQ(r.trace.epochs.size(), 1u);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.best_epoch, 1);
}

TEST(Reconstruct, UnitSphereWithPublishedOptimum) {
    const TrainingCloud cloud(fixtures::sample_unit_sphere(10000, 6));
    const ReconstructResult r = reconstruct(cloud, GngParams::published_optimum(), 1);
    EXPECT_LT(consistency_error(r.model, cloud.index()), 0.02);
}

TEST(Reconstruct, PrototypeGraphIsConnected) {
    const TrainingCloud cloud(generate_prototype(2200, 1));
    const ReconstructResult r = reconstruct(cloud, seed_params(), 1);
    EXPECT_EQ(components(r.model), 1);
    r.model.check_invariants();
}

TEST(Reconstruct, TraceCsv) {
    EpochTrace t;
    t.epochs = {{1, 0.5, 10, 12}, {2, 0.25, 11, 14}};
    EXPECT_EQ(t.to_csv(), "epoch,epsilon,neurons,edges\n1,0.5,10,12\n2,0.25,11,14\n");
}

TEST(ExtractFaces, Cliques) {
    GngModel k3;
    for (int i = 0; i < 3; ++i) k3.add_neuron(Vec3(i, i * i, 0));
    k3.connect(0, 1);
    k3.connect(1, 2);
    k3.connect(0, 2);
    EXPECT_EQ(extract_faces(k3).faces.size(), 1u);

    GngModel k4 = k3;
    k4.add_neuron({0, 0, 1});
    for (int i = 0; i < 3; ++i) k4.connect(i, 3);
    const TriangleMesh m = extract_faces(k4);
    EXPECT_EQ(m.faces.size(), 4u);
    EXPECT_EQ(m.vertices.size(), 4u);

    GngModel path;
    for (int i = 0; i < 4; ++i) path.add_neuron(Vec3(i, 0, 0));
    for (int i = 0; i < 3; ++i) path.connect(i, i + 1);
    EXPECT_TRUE(extract_faces(path).faces.empty());
}
