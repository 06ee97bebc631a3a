#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "gngwt/error.h"
#include "gngwt/gng.h"
#include "gngwt/mesh_ops.h"
#include "mesh_util.h"

namespace gngwt {

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

Vec3 face_normal(const TriangleMesh& mesh, int a, int b, int c) {
    return (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
}

double shape_quality(const TriangleMesh& mesh, const Face& f) {
    const double l0 = (mesh.vertices[f[0]] - mesh.vertices[f[1]]).norm();
    const double l1 = (mesh.vertices[f[1]] - mesh.vertices[f[2]]).norm();
    const double l2 = (mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
    const double hi = std::max({l0, l1, l2});
    return hi > 0 ? std::min({l0, l1, l2}) / hi : 0.0;
}

// Turning more sharply than this between adjacent faces is treated as a fold.
constexpr double kMaxTurnCost = 1.0 + 0.8660254037844386;  // 1 - cos(150 deg)

/// Face-by-face growth of one oriented manifold patch.
class PatchGrower {
public:
    PatchGrower(const TriangleMesh& soup, const std::unordered_map<std::uint64_t, std::vector<int>>& edge_faces)
        : soup_(soup), edge_faces_(edge_faces), taken_(soup.faces.size(), 0), vertex_faces_(soup.vertices.size(), 0),
          vertex_edges_(soup.vertices.size()) {}

    std::vector<Face> grow(int seed) {
        const Face& f = soup_.faces[seed];
        accept(seed, f);
        while (!queue_.empty()) {
            const Candidate c = queue_.top();
            queue_.pop();
            if (taken_[c.face] || !admissible(c.oriented)) continue;
            accept(c.face, c.oriented);
        }
        return patch_;
    }

    const std::vector<char>& taken() const { return taken_; }

private:
    struct Candidate {
        double cost;
        int face;
        Face oriented;
        bool operator<(const Candidate& o) const {
            // min-heap on cost, then on face index
            if (cost != o.cost) return cost > o.cost;
            return face > o.face;
        }
    };

    int edge_uses(int a, int b) const {
        auto it = edge_use_.find(detail::edge_key(a, b));
        return it == edge_use_.end() ? 0 : it->second;
    }

    bool on_boundary(int v, int x) const { return edge_uses(v, x) == 1; }

    bool admissible(const Face& f) const {
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            if (directed_.count(detail::directed_key(a, b)) || edge_uses(a, b) >= 2) return false;
        }
        for (int k = 0; k < 3; ++k) {
            const int v = f[k];
            if (vertex_faces_[v] == 0) continue;
            const int p = f[(k + 1) % 3];
            const int q = f[(k + 2) % 3];
            bool open = false;
            for (int x : vertex_edges_[v]) {
                if (on_boundary(v, x)) {
                    open = true;
                    break;
                }
            }
            if (!open) return false;  // vertex already enclosed by a full fan
            if (!on_boundary(v, p) && !on_boundary(v, q)) return false;  // would start a second fan
        }
        return true;
    }

    void accept(int face, const Face& f) {
        taken_[face] = 1;
        patch_.push_back(f);
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            directed_.insert(detail::directed_key(a, b));
            if (edge_use_[detail::edge_key(a, b)]++ == 0) {
                vertex_edges_[a].push_back(b);
                vertex_edges_[b].push_back(a);
            }
            ++vertex_faces_[a];
        }
        const Vec3 n = face_normal(soup_, f[0], f[1], f[2]).normalized();
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            if (edge_uses(a, b) != 1) continue;
            auto it = edge_faces_.find(detail::edge_key(a, b));
            for (int g : it->second) {
                if (taken_[g]) continue;
                const Face& raw = soup_.faces[g];
                int w = -1;
                for (int v : raw) {
                    if (v != a && v != b) w = v;
                }
                const Face oriented{b, a, w};
                const Vec3 m = face_normal(soup_, b, a, w);
                if (m.squaredNorm() == 0) continue;
                const double cost = 1.0 - n.dot(m.normalized());
                if (cost > kMaxTurnCost) continue;
                queue_.push({cost, g, oriented});
            }
        }
    }

    const TriangleMesh& soup_;
    const std::unordered_map<std::uint64_t, std::vector<int>>& edge_faces_;
    std::vector<char> taken_;
    std::vector<int> vertex_faces_;
    std::vector<std::vector<int>> vertex_edges_;
    std::unordered_map<std::uint64_t, int> edge_use_;
    std::unordered_set<std::uint64_t> directed_;
    std::priority_queue<Candidate> queue_;
    std::vector<Face> patch_;
};

}  // namespace

double edge_pair_proximity(const Vec3& vi, const Vec3& vj, const Vec3& vk) {
    return std::min(point_segment_distance(vi, vj, vk), point_segment_distance(vk, vi, vj));
}

std::size_t remove_close_edges(GngModel& graph, double t_p) {
    if (!(t_p > 0)) {
        throw InvalidArgument("remove_close_edges: t_p must be positive");
    }
    std::size_t removed = 0;
    std::vector<int> around_i;
    std::vector<int> around_j;
    for (int i = 0; i < graph.size(); ++i) {
        around_i.clear();
        for (const EdgeRef& e : graph.neighbors(i)) around_i.push_back(e.to);
        std::sort(around_i.begin(), around_i.end());
        for (int j : around_i) {
            if (!graph.connected(i, j)) continue;
            around_j.clear();
            for (const EdgeRef& e : graph.neighbors(j)) around_j.push_back(e.to);
            std::sort(around_j.begin(), around_j.end());
            for (int k : around_j) {
                if (k == i || !graph.connected(j, k)) continue;
                if (edge_pair_proximity(graph.position(i), graph.position(j), graph.position(k)) < t_p) {
                    graph.disconnect(j, k);
                    ++removed;
                }
            }
        }
    }
    return removed;
}

std::size_t complete_quads(GngModel& graph) {
    std::size_t added = 0;
    std::vector<int> around;
    for (int a = 0; a < graph.size(); ++a) {
        around.clear();
        for (const EdgeRef& e : graph.neighbors(a)) around.push_back(e.to);
        std::sort(around.begin(), around.end());
        for (std::size_t x = 0; x < around.size(); ++x) {
            for (std::size_t y = x + 1; y < around.size(); ++y) {
                const int b = around[x];
                const int d = around[y];
                if (graph.connected(b, d)) continue;
                int best_c = -1;
                for (const EdgeRef& e : graph.neighbors(b)) {
                    const int c = e.to;
                    if (c == a || !graph.connected(c, d) || graph.connected(c, a)) continue;
                    if (best_c < 0 || c < best_c) best_c = c;
                }
                if (best_c < 0) continue;
                const double ac = (graph.position(a) - graph.position(best_c)).squaredNorm();
                const double bd = (graph.position(b) - graph.position(d)).squaredNorm();
                if (ac < bd) {
                    graph.connect(a, best_c);
                } else {
                    graph.connect(b, d);
                }
                ++added;
                break;
            }
        }
    }
    return added;
}

std::size_t extract_manifold(TriangleMesh& mesh, RepairLog* log) {
    const std::size_t total = mesh.faces.size();
    std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
    for (std::size_t f = 0; f < total; ++f) {
        const Face& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            edge_faces[detail::edge_key(face[k], face[(k + 1) % 3])].push_back(static_cast<int>(f));
        }
    }

    // Seeds: faces whose edges are all locally manifold first, then by shape quality.
    std::vector<int> seeds;
    std::vector<char> clean(total, 0);
    std::vector<double> quality(total, 0.0);
    for (std::size_t f = 0; f < total; ++f) {
        const Face& face = mesh.faces[f];
        quality[f] = shape_quality(mesh, face);
        if (quality[f] <= 0) continue;
        clean[f] = 1;
        for (int k = 0; k < 3; ++k) {
            if (edge_faces[detail::edge_key(face[k], face[(k + 1) % 3])].size() > 2) clean[f] = 0;
        }
        seeds.push_back(static_cast<int>(f));
    }
    std::sort(seeds.begin(), seeds.end(), [&](int a, int b) {
        if (clean[a] != clean[b]) return clean[a] > clean[b];
        if (quality[a] != quality[b]) return quality[a] > quality[b];
        return a < b;
    });

    std::vector<Face> best;
    std::vector<char> covered(total, 0);
    std::size_t uncovered = seeds.size();
    constexpr int kMaxAttempts = 32;
    int attempts = 0;
    for (int seed : seeds) {
        if (covered[seed]) continue;
        if (best.size() >= uncovered || attempts >= kMaxAttempts) break;
        ++attempts;
        PatchGrower grower(mesh, edge_faces);
        std::vector<Face> patch = grower.grow(seed);
        for (std::size_t f = 0; f < total; ++f) {
            if (grower.taken()[f] && !covered[f]) {
                covered[f] = 1;
                --uncovered;
            }
        }
        if (patch.size() > best.size()) best = std::move(patch);
    }

    const std::size_t discarded = total - best.size();
    mesh.faces = std::move(best);

    std::vector<int> remap(mesh.vertices.size(), -1);
    std::vector<Vec3> vertices;
    std::vector<Rgb> colors;
    for (Face& f : mesh.faces) {
        for (int& v : f) {
            if (remap[v] < 0) {
                remap[v] = 0;
            }
        }
    }
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (remap[v] < 0) continue;
        remap[v] = static_cast<int>(vertices.size());
        vertices.push_back(mesh.vertices[v]);
        if (mesh.has_colors()) colors.push_back(mesh.colors[v]);
    }
    const std::size_t dropped_vertices = mesh.vertices.size() - vertices.size();
    for (Face& f : mesh.faces) {
        for (int& v : f) v = remap[v];
    }
    mesh.vertices = std::move(vertices);
    mesh.colors = std::move(colors);

    if (log) {
        log->add("extract_manifold", "faces_discarded", discarded);
        log->add("extract_manifold", "vertices_dropped", dropped_vertices);
    }
    return discarded;
}

}  // namespace gngwt
