#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include <Eigen/Dense>

#include "gngwt/error.h"
#include "gngwt/mesh_ops.h"
#include "mesh_util.h"

namespace gngwt {

namespace {

using Quadric = Eigen::Matrix4d;

double quadric_cost(const Quadric& q, const Vec3& p) {
    const Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
    return std::max(0.0, h.dot(q * h));
}

class Decimator {
public:
    explicit Decimator(TriangleMesh& mesh)
        : mesh_(mesh),
          alive_(mesh.faces.size(), 1),
          vertex_faces_(mesh.vertices.size()),
          quadric_(mesh.vertices.size(), Quadric::Zero()),
          version_(mesh.vertices.size(), 0),
          live_faces_(mesh.faces.size()) {
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            const Face& face = mesh.faces[f];
            for (int v : face) vertex_faces_[v].push_back(static_cast<int>(f));
            const Vec3& a = mesh.vertices[face[0]];
            const Vec3 n = (mesh.vertices[face[1]] - a).cross(mesh.vertices[face[2]] - a);
            const double area2 = n.norm();
            if (area2 == 0) continue;
            const Vec3 unit = n / area2;
            const Eigen::Vector4d plane(unit.x(), unit.y(), unit.z(), -unit.dot(a));
            const Quadric k = 0.5 * area2 * plane * plane.transpose();
            for (int v : face) quadric_[v] += k;
        }
        std::unordered_set<std::uint64_t> seen;
        for (const Face& face : mesh.faces) {
            for (int k = 0; k < 3; ++k) {
                const int a = face[k];
                const int b = face[(k + 1) % 3];
                if (seen.insert(detail::edge_key(a, b)).second) push(std::min(a, b), std::max(a, b));
            }
        }
    }

    std::size_t run(std::size_t target) {
        while (live_faces_ > target && !heap_.empty()) {
            const Entry e = heap_.top();
            heap_.pop();
            if (e.version_u != version_[e.u] || e.version_v != version_[e.v]) continue;
            collapse_if_valid(e.u, e.v, e.position);
        }
        compact();
        return live_faces_;
    }

private:
    struct Entry {
        double cost;
        int u, v;
        int version_u, version_v;
        Vec3 position;
        bool operator<(const Entry& o) const {
            if (cost != o.cost) return cost > o.cost;
            if (u != o.u) return u > o.u;
            return v > o.v;
        }
    };

    void push(int u, int v) {
        const Quadric q = quadric_[u] + quadric_[v];
        const Vec3& pu = mesh_.vertices[u];
        const Vec3& pv = mesh_.vertices[v];
        std::vector<Vec3> options{pu, pv, 0.5 * (pu + pv)};
        Eigen::Matrix4d system = q;
        system.row(3) << 0, 0, 0, 1;
        Eigen::FullPivLU<Eigen::Matrix4d> lu(system);
        if (lu.isInvertible() && lu.rcond() > 1e-9) {
            const Eigen::Vector4d x = lu.solve(Eigen::Vector4d(0, 0, 0, 1));
            const Vec3 opt = x.head<3>();
            // keep the optimum only near the edge, guards nearly singular systems
            if (opt.allFinite() && (opt - options[2]).norm() <= 2.0 * (pu - pv).norm()) options.push_back(opt);
        }
        Vec3 best = options[0];
        double best_cost = quadric_cost(q, best);
        for (const Vec3& p : options) {
            const double c = quadric_cost(q, p);
            if (c < best_cost) {
                best_cost = c;
                best = p;
            }
        }
        heap_.push({best_cost, u, v, version_[u], version_[v], best});
    }

    std::vector<int> link(int v) const {
        std::vector<int> out;
        for (int f : vertex_faces_[v]) {
            if (!alive_[f]) continue;
            for (int w : mesh_.faces[f]) {
                if (w != v) out.push_back(w);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool collapse_if_valid(int u, int v, const Vec3& target) {
        std::vector<int> shared;
        std::vector<int> opposite;
        for (int f : vertex_faces_[u]) {
            if (!alive_[f]) continue;
            const Face& face = mesh_.faces[f];
            if (std::find(face.begin(), face.end(), v) == face.end()) continue;
            shared.push_back(f);
            for (int w : face) {
                if (w != u && w != v) opposite.push_back(w);
            }
        }
        if (shared.empty()) return false;
        if (live_faces_ < shared.size() + 4) return false;

        // Link condition: the two vertex links may only meet at the edge's opposite vertices.
        const std::vector<int> lu = link(u);
        const std::vector<int> lv = link(v);
        std::vector<int> common;
        std::set_intersection(lu.begin(), lu.end(), lv.begin(), lv.end(), std::back_inserter(common));
        std::sort(opposite.begin(), opposite.end());
        opposite.erase(std::unique(opposite.begin(), opposite.end()), opposite.end());
        if (common != opposite) return false;

        // Reject collapses that flip or degenerate any surviving face.
        for (int endpoint : {u, v}) {
            for (int f : vertex_faces_[endpoint]) {
                if (!alive_[f] || std::find(shared.begin(), shared.end(), f) != shared.end()) continue;
                const Face& face = mesh_.faces[f];
                Vec3 p[3];
                for (int k = 0; k < 3; ++k) p[k] = mesh_.vertices[face[k]];
                const Vec3 before = (p[1] - p[0]).cross(p[2] - p[0]);
                for (int k = 0; k < 3; ++k) {
                    if (face[k] == endpoint) p[k] = target;
                }
                const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
                if (after.squaredNorm() <= 1e-24 * std::max(before.squaredNorm(), 1e-300)) return false;
                if (before.dot(after) <= 0) return false;
            }
        }

        for (int f : shared) {
            alive_[f] = 0;
            --live_faces_;
        }
        for (int f : vertex_faces_[v]) {
            if (!alive_[f]) continue;
            for (int& w : mesh_.faces[f]) {
                if (w == v) w = u;
            }
            vertex_faces_[u].push_back(f);
        }
        vertex_faces_[v].clear();
        mesh_.vertices[u] = target;
        quadric_[u] += quadric_[v];
        ++version_[u];
        ++version_[v];
        for (int w : link(u)) push(std::min(u, w), std::max(u, w));
        return true;
    }

    void compact() {
        std::vector<Face> faces;
        for (std::size_t f = 0; f < mesh_.faces.size(); ++f) {
            if (alive_[f]) faces.push_back(mesh_.faces[f]);
        }
        std::vector<int> remap(mesh_.vertices.size(), -1);
        std::vector<Vec3> vertices;
        std::vector<Rgb> colors;
        for (Face& f : faces) {
            for (int& w : f) {
                if (remap[w] < 0) remap[w] = -2;
            }
        }
        for (std::size_t w = 0; w < mesh_.vertices.size(); ++w) {
            if (remap[w] != -2) continue;
            remap[w] = static_cast<int>(vertices.size());
            vertices.push_back(mesh_.vertices[w]);
            if (mesh_.has_colors()) colors.push_back(mesh_.colors[w]);
        }
        for (Face& f : faces) {
            for (int& w : f) w = remap[w];
        }
        mesh_.faces = std::move(faces);
        mesh_.vertices = std::move(vertices);
        mesh_.colors = std::move(colors);
    }

    TriangleMesh& mesh_;
    std::vector<char> alive_;
    std::vector<std::vector<int>> vertex_faces_;
    std::vector<Quadric> quadric_;
    std::vector<int> version_;
    std::size_t live_faces_;
    std::priority_queue<Entry> heap_;
};

}  // namespace

std::size_t simplify(TriangleMesh& mesh, std::size_t target_faces, RepairLog* log) {
    if (target_faces < 4) {
        throw InvalidArgument("simplify: target face count must be at least 4");
    }
    if (mesh.faces.size() <= target_faces) {
        if (log) log->add("simplify", "faces", mesh.faces.size());
        return mesh.faces.size();
    }
    Decimator decimator(mesh);
    const std::size_t achieved = decimator.run(target_faces);
    if (log) {
        log->add("simplify", "faces", achieved);
        if (achieved > target_faces) log->add("simplify", "target_unreachable", target_faces);
    }
    return achieved;
}

}  // namespace gngwt
