#include "gngwt/spatial_index.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gngwt/cloud_io.h"
#include "gngwt/error.h"

namespace gngwt {

namespace {

constexpr int kLeafSize = 8;

double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

double Neighbor::distance() const { return std::sqrt(squared_distance); }

SpatialIndex::SpatialIndex(const PointCloud& cloud) : SpatialIndex(cloud.points) {}

SpatialIndex::SpatialIndex(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw InvalidArgument("SpatialIndex: cannot index an empty point set");
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<int>(points_.size()));
}

int SpatialIndex::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) {
        return id;
    }

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double va = points_[a][axis];
                         const double vb = points_[b][axis];
                         return va < vb || (va == vb && a < b);
                     });
    const double split = points_[order_[mid]][axis];

    const int left = build(begin, mid);
    const int right = build(mid, end);
    Node& node = nodes_[id];
    node.split_axis = axis;
    node.split_value = split;
    node.left = left;
    node.right = right;
    return id;
}

void SpatialIndex::search(int node_id, const Vec3& query, int excluded, Neighbor& best) const {
    const Node& node = nodes_[node_id];
    if (node.split_axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = order_[i];
            if (idx == excluded) continue;
            const double d = squared_distance(query, points_[idx]);
            if (d < best.squared_distance || (d == best.squared_distance && idx < best.index)) {
                best = {idx, d};
            }
        }
        return;
    }
    // Points equal to the split value may sit on either side, so both children
    // are bounded by the same plane.
    const double diff = query[node.split_axis] - node.split_value;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, query, excluded, best);
    if (diff * diff <= best.squared_distance) {
        search(far, query, excluded, best);
    }
}

Neighbor SpatialIndex::nearest(const Vec3& query) const {
    Neighbor best{-1, std::numeric_limits<double>::infinity()};
    search(0, query, -1, best);
    return best;
}

Neighbor SpatialIndex::nearest_excluding(const Vec3& query, int excluded) const {
    if (points_.size() < 2) {
        throw InvalidArgument("SpatialIndex: nearest_excluding needs at least two points");
    }
    Neighbor best{-1, std::numeric_limits<double>::infinity()};
    search(0, query, excluded, best);
    return best;
}

}  // namespace gngwt
