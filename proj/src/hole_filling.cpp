#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Eigenvalues>

#include "gngwt/error.h"
#include "gngwt/mesh_ops.h"
#include "mesh_util.h"

namespace gngwt {

namespace {

using Vec2 = Eigen::Vector2d;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Orientation-aware segment intersection, touching included.
bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2, double eps) {
    const double d1 = cross2(q2 - q1, p1 - q1);
    const double d2 = cross2(q2 - q1, p2 - q1);
    const double d3 = cross2(p2 - p1, q1 - p1);
    const double d4 = cross2(p2 - p1, q2 - p1);
    if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))) {
        return true;
    }
    auto on_segment = [eps](const Vec2& a, const Vec2& b, const Vec2& p, double d) {
        if (std::abs(d) > eps) return false;
        return p.x() >= std::min(a.x(), b.x()) - 1e-12 && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
               p.y() >= std::min(a.y(), b.y()) - 1e-12 && p.y() <= std::max(a.y(), b.y()) + 1e-12;
    };
    return on_segment(q1, q2, p1, d1) || on_segment(q1, q2, p2, d2) || on_segment(p1, p2, q1, d3) ||
           on_segment(p1, p2, q2, d4);
}

bool is_simple(const std::vector<Vec2>& poly, double eps) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        if ((b - a).squaredNorm() <= eps) return false;
        // adjacent edge folding back onto this one
        const Vec2& c = poly[(i + 2) % n];
        if (std::abs(cross2(b - a, c - b)) <= eps && (b - a).dot(c - b) < 0) return false;
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_touch(a, b, poly[j], poly[(j + 1) % n], eps)) return false;
        }
    }
    return true;
}

bool in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c, double sign, double eps) {
    return sign * cross2(b - a, p - a) >= -eps && sign * cross2(c - b, p - b) >= -eps &&
           sign * cross2(a - c, p - c) >= -eps;
}

double corner_quality(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double l0 = (a - b).norm();
    const double l1 = (b - c).norm();
    const double l2 = (c - a).norm();
    const double hi = std::max({l0, l1, l2});
    return hi > 0 ? std::min({l0, l1, l2}) / hi : 0.0;
}

class HoleFiller {
public:
    HoleFiller(TriangleMesh& mesh) : mesh_(mesh) {
        for (const Face& f : mesh_.faces) {
            for (int k = 0; k < 3; ++k) edges_.insert(detail::edge_key(f[k], f[(k + 1) % 3]));
        }
    }

    void fill(const std::vector<int>& loop, HoleFillStats& stats) {
        if (loop.size() == 3) {
            add_face(loop[0], loop[1], loop[2], stats);
            return;
        }

        // Least-squares plane of the loop.
        Vec3 centroid = Vec3::Zero();
        for (int v : loop) centroid += mesh_.vertices[v];
        centroid /= static_cast<double>(loop.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (int v : loop) {
            const Vec3 d = mesh_.vertices[v] - centroid;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        const Vec3 u = solver.eigenvectors().col(2);
        const Vec3 w = solver.eigenvectors().col(1);

        std::vector<Vec2> poly;
        double extent = 0.0;
        for (int v : loop) {
            const Vec3 d = mesh_.vertices[v] - centroid;
            poly.emplace_back(d.dot(u), d.dot(w));
            extent = std::max(extent, poly.back().norm());
        }
        const double eps = 1e-12 * std::max(extent * extent, 1e-300);

        if (!is_simple(poly, eps)) {
            fan(loop, stats);
            return;
        }

        double area = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i) area += cross2(poly[i], poly[(i + 1) % poly.size()]);
        const double sign = area >= 0 ? 1.0 : -1.0;

        std::vector<int> ring(loop.size());
        for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int>(i);
        while (ring.size() > 3) {
            int best = -1;
            double best_quality = -1.0;
            const std::size_t n = ring.size();
            for (std::size_t i = 0; i < n; ++i) {
                const int ip = ring[(i + n - 1) % n];
                const int ic = ring[i];
                const int in = ring[(i + 1) % n];
                const Vec2& a = poly[ip];
                const Vec2& b = poly[ic];
                const Vec2& c = poly[in];
                if (sign * cross2(b - a, c - b) <= eps) continue;
                if (edges_.count(detail::edge_key(loop[ip], loop[in]))) continue;
                bool blocked = false;
                for (std::size_t j = 0; j < n && !blocked; ++j) {
                    const int other = ring[j];
                    if (other == ip || other == ic || other == in) continue;
                    blocked = in_triangle(poly[other], a, b, c, sign, eps);
                }
                if (blocked) continue;
                const double q = corner_quality(a, b, c);
                if (q > best_quality) {
                    best_quality = q;
                    best = static_cast<int>(i);
                }
            }
            if (best < 0) {
                std::vector<int> rest;
                for (int r : ring) rest.push_back(loop[r]);
                fan(rest, stats);
                return;
            }
            const std::size_t i = static_cast<std::size_t>(best);
            add_face(loop[ring[(i + n - 1) % n]], loop[ring[i]], loop[ring[(i + 1) % n]], stats);
            ring.erase(ring.begin() + best);
        }
        add_face(loop[ring[0]], loop[ring[1]], loop[ring[2]], stats);
    }

private:
    void add_face(int a, int b, int c, HoleFillStats& stats) {
        mesh_.faces.push_back({a, b, c});
        edges_.insert(detail::edge_key(a, b));
        edges_.insert(detail::edge_key(b, c));
        edges_.insert(detail::edge_key(c, a));
        ++stats.faces_added;
    }

    void fan(const std::vector<int>& loop, HoleFillStats& stats) {
        Vec3 centroid = Vec3::Zero();
        for (int v : loop) centroid += mesh_.vertices[v];
        centroid /= static_cast<double>(loop.size());
        const int c = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back(centroid);
        if (mesh_.has_colors()) mesh_.colors.push_back(Rgb{});
        for (std::size_t i = 0; i < loop.size(); ++i) {
            add_face(loop[i], loop[(i + 1) % loop.size()], c, stats);
        }
        ++stats.fan_fallbacks;
    }

    TriangleMesh& mesh_;
    std::unordered_set<std::uint64_t> edges_;
};

}  // namespace

std::vector<BoundaryLoop> boundary_loops(const TriangleMesh& mesh) {
    std::unordered_map<std::uint64_t, int> uses;
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) ++uses[detail::edge_key(f[k], f[(k + 1) % 3])];
    }
    // A hole is walked against the winding of the faces bordering it.
    std::unordered_map<int, int> next;
    std::vector<int> starts;
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            if (uses[detail::edge_key(a, b)] != 1) continue;
            if (!next.emplace(b, a).second) {
                throw TopologyError("boundary vertex " + std::to_string(b) + " starts more than one boundary edge");
            }
            starts.push_back(b);
        }
    }
    std::sort(starts.begin(), starts.end());

    std::vector<BoundaryLoop> loops;
    std::unordered_set<int> visited;
    for (int start : starts) {
        if (visited.count(start)) continue;
        BoundaryLoop loop;
        int v = start;
        do {
            if (!visited.insert(v).second) {
                throw TopologyError("boundary walk revisits vertex " + std::to_string(v));
            }
            loop.vertices.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) {
                throw TopologyError("open boundary chain at vertex " + std::to_string(v));
            }
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    return loops;
}

HoleFillStats fill_holes(TriangleMesh& mesh, RepairLog* log) {
    HoleFillStats stats;
    const std::vector<BoundaryLoop> loops = boundary_loops(mesh);
    HoleFiller filler(mesh);
    for (const BoundaryLoop& loop : loops) {
        filler.fill(loop.vertices, stats);
        ++stats.loops_closed;
    }
    if (log) {
        log->add("fill_holes", "loops_closed", stats.loops_closed);
        log->add("fill_holes", "faces_added", stats.faces_added);
        log->add("fill_holes", "fan_fallbacks", stats.fan_fallbacks);
    }
    return stats;
}

}  // namespace gngwt
