#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "gngwt/error.h"
#include "gngwt/spatial_index.h"

using namespace gngwt;

namespace {

Neighbor brute(const std::vector<Vec3>& pts, const Vec3& q) {
    Neighbor best{-1, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 d = pts[i] - q;
        const double s = d.x() * d.x() + d.y() * d.y() + d.z() * d.z();
        if (s < best.squared_distance) best = {static_cast<int>(i), s};
    }
    return best;
}

}  // namespace

TEST(SpatialIndex, TwoPoints) {
    const SpatialIndex idx(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}});
    EXPECT_EQ(idx.nearest({0.1, 0, 0}).index, 0);
    EXPECT_EQ(idx.nearest({0.9, 0, 0}).index, 1);
}

TEST(SpatialIndex, QueryOnStoredPoint) {
    const SpatialIndex idx(std::vector<Vec3>{{0, 0, 0}, {1, 2, 3}, {4, 5, 6}});
    const Neighbor n = idx.nearest({1, 2, 3});
    EXPECT_EQ(n.index, 1);
    EXPECT_EQ(n.distance(), 0.0);
}

TEST(SpatialIndex, TiesGoToLowestIndex) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) pts.emplace_back(i % 2 ? 1.0 : -1.0, 0, 0);
    const SpatialIndex idx(pts);
    EXPECT_EQ(idx.nearest({0, 0, 0}).index, 0);
    EXPECT_EQ(idx.nearest({0, 5, 0}).index, 0);
    EXPECT_EQ(idx.nearest({0.5, 0, 0}).index, 1);
}

TEST(SpatialIndex, EmptyThrows) { EXPECT_THROW(SpatialIndex(std::vector<Vec3>{}), InvalidArgument); }

TEST(SpatialIndex, RandomQueriesMatchBruteForce) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> pts;
    for (int i = 0; i < 1000; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const SpatialIndex idx(pts);
    for (int q = 0; q < 100; ++q) {
        const Vec3 query(u(rng), u(rng), u(rng));
        const Neighbor a = idx.nearest(query);
        const Neighbor b = brute(pts, query);
        EXPECT_EQ(a.index, b.index);
        EXPECT_EQ(a.squared_distance, b.squared_distance);
    }
}

TEST(SpatialIndex, GridWithDuplicatesMatchesBruteForce) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> cell(0, 4);
    std::vector<Vec3> pts;
    for (int i = 0; i < 400; ++i) pts.emplace_back(cell(rng), cell(rng), cell(rng));
    const SpatialIndex idx(pts);
    std::uniform_real_distribution<double> u(-1, 5);
    for (int q = 0; q < 500; ++q) {
        const Vec3 query = q % 2 ? Vec3(cell(rng) + 0.5, cell(rng), cell(rng) + 0.5) : Vec3(u(rng), u(rng), u(rng));
        EXPECT_EQ(idx.nearest(query).index, brute(pts, query).index);
    }
}

TEST(SpatialIndex, NearestExcluding) {
    const SpatialIndex idx(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}});
    EXPECT_EQ(idx.nearest_excluding({0, 0, 0}, 0).index, 1);
    EXPECT_EQ(idx.nearest_excluding({3, 0, 0}, 2).index, 1);
}
