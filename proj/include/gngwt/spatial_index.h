#pragma once

#include <span>
#include <vector>

#include "gngwt/types.h"

namespace gngwt {

struct PointCloud;

struct Neighbor {
    int index = -1;
    double squared_distance = 0.0;

    double distance() const;
};

/// Balanced 3-d tree over a fixed set of positions. Immutable after construction and
/// safe for concurrent queries. Ties are broken by the lowest point index.
class SpatialIndex {
public:
    explicit SpatialIndex(std::vector<Vec3> points);
    explicit SpatialIndex(const PointCloud& cloud);

    std::size_t size() const { return points_.size(); }
    const Vec3& point(int i) const { return points_[static_cast<std::size_t>(i)]; }

    Neighbor nearest(const Vec3& query) const;
    double nearest_distance(const Vec3& query) const { return nearest(query).distance(); }

    /// Nearest point whose index differs from `excluded`. Requires size() >= 2.
    Neighbor nearest_excluding(const Vec3& query, int excluded) const;

private:
    struct Node {
        int begin = 0;  // range into order_
        int end = 0;
        int split_axis = -1;  // -1 for leaves
        double split_value = 0.0;
        int left = -1;
        int right = -1;
    };

    int build(int begin, int end);
    void search(int node, const Vec3& query, int excluded, Neighbor& best) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

}  // namespace gngwt
