#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gngwt/error.h"
#include "gngwt/mesh_ops.h"
#include "mesh_util.h"

namespace gngwt {

void RepairLog::add(std::string_view stage, std::string_view action, std::size_t count) {
    lines_.push_back(std::string(stage) + "," + std::string(action) + "," + std::to_string(count));
}

std::string RepairLog::str() const {
    std::string out;
    for (const auto& line : lines_) {
        out += line;
        out += '\n';
    }
    return out;
}

double signed_volume(const TriangleMesh& mesh) {
    double six_v = 0.0;
    for (const Face& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        six_v += a.dot(b.cross(c));
    }
    return six_v / 6.0;
}

std::string WatertightReport::str() const {
    std::ostringstream out;
    out << "watertight: " << (watertight() ? "true" : "false") << '\n'
        << "vertices: " << vertices << '\n'
        << "edges: " << edges << '\n'
        << "faces: " << faces << '\n'
        << "boundary_edges: " << boundary_edges << '\n'
        << "non_manifold_edges: " << non_manifold_edges << '\n'
        << "components: " << components << '\n'
        << "consistently_oriented: " << (consistently_oriented ? "true" : "false") << '\n'
        << "euler_characteristic: " << euler_characteristic << '\n';
    out.precision(9);
    out << "signed_volume: " << signed_volume << '\n';
    return out.str();
}

WatertightReport watertight_report(const TriangleMesh& mesh) {
    WatertightReport report;
    report.faces = mesh.faces.size();

    struct Use {
        int forward = 0;   // traversed low -> high
        int backward = 0;  // traversed high -> low
    };
    std::unordered_map<std::uint64_t, Use> edges;
    std::vector<char> referenced(mesh.vertices.size(), 0);
    detail::UnionFind components(mesh.vertices.size());
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            referenced[a] = 1;
            Use& use = edges[detail::edge_key(a, b)];
            (a < b ? use.forward : use.backward)++;
        }
        components.unite(f[0], f[1]);
        components.unite(f[0], f[2]);
    }

    report.consistently_oriented = true;
    for (const auto& [key, use] : edges) {
        const int count = use.forward + use.backward;
        if (count == 1) ++report.boundary_edges;
        if (count > 2) ++report.non_manifold_edges;
        if (use.forward > 1 || use.backward > 1) report.consistently_oriented = false;
    }
    report.edges = edges.size();

    std::set<int> roots;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (referenced[v]) {
            ++report.vertices;
            roots.insert(components.find(static_cast<int>(v)));
        }
    }
    report.components = roots.size();
    report.euler_characteristic = static_cast<long>(report.vertices) - static_cast<long>(report.edges) +
                                  static_cast<long>(report.faces);
    report.signed_volume = signed_volume(mesh);
    return report;
}

std::size_t orient(TriangleMesh& mesh, RepairLog* log) {
    const std::size_t nf = mesh.faces.size();
    std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
    for (std::size_t f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) {
            auto& list = edge_faces[detail::edge_key(mesh.faces[f][k], mesh.faces[f][(k + 1) % 3])];
            list.push_back(static_cast<int>(f));
            if (list.size() > 2) {
                throw TopologyError("orient: edge (" + std::to_string(mesh.faces[f][k]) + ", " +
                                    std::to_string(mesh.faces[f][(k + 1) % 3]) + ") has more than two faces");
            }
        }
    }

    std::vector<int> component(nf, -1);
    std::vector<char> flip(nf, 0);
    auto traverses = [&](int f, int a, int b) {
        const Face& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            if (face[k] == a && face[(k + 1) % 3] == b) return !flip[f];
            if (face[k] == b && face[(k + 1) % 3] == a) return static_cast<bool>(flip[f]);
        }
        return false;
    };

    int n_components = 0;
    for (std::size_t seed = 0; seed < nf; ++seed) {
        if (component[seed] >= 0) continue;
        const int id = n_components++;
        std::queue<int> queue;
        queue.push(static_cast<int>(seed));
        component[seed] = id;
        while (!queue.empty()) {
            const int f = queue.front();
            queue.pop();
            for (int k = 0; k < 3; ++k) {
                const int a = mesh.faces[f][k];
                const int b = mesh.faces[f][(k + 1) % 3];
                // direction of (a, b) in f after its pending flip
                const bool f_ab = traverses(f, a, b);
                for (int g : edge_faces[detail::edge_key(a, b)]) {
                    if (g == f) continue;
                    if (component[g] < 0) {
                        component[g] = id;
                        // g must traverse the shared edge opposite to f
                        flip[g] = 0;
                        if (traverses(g, a, b) == f_ab) flip[g] = 1;
                        queue.push(g);
                    } else if (traverses(g, a, b) == f_ab) {
                        throw TopologyError("orient: non-orientable surface at edge (" + std::to_string(a) + ", " +
                                            std::to_string(b) + ")");
                    }
                }
            }
        }
    }

    // Outward normals: positive signed volume per component.
    std::vector<double> volume(n_components, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        const Face& face = mesh.faces[f];
        const Vec3& a = mesh.vertices[face[0]];
        const Vec3& b = mesh.vertices[face[1]];
        const Vec3& c = mesh.vertices[face[2]];
        const double v = a.dot(b.cross(c));
        volume[component[f]] += flip[f] ? -v : v;
    }
    std::size_t flipped = 0;
    for (std::size_t f = 0; f < nf; ++f) {
        const bool reverse = static_cast<bool>(flip[f]) != (volume[component[f]] < 0);
        if (reverse) {
            std::swap(mesh.faces[f][1], mesh.faces[f][2]);
            ++flipped;
        }
    }
    if (log) log->add("orient", "faces_flipped", flipped);
    return flipped;
}

DedupStats dedup(TriangleMesh& mesh, double weld_eps, RepairLog* log) {
    if (!(weld_eps >= 0) || !std::isfinite(weld_eps)) {
        throw InvalidArgument("dedup: weld_eps must be a non-negative finite length");
    }
    DedupStats stats;
    const std::size_t nv = mesh.vertices.size();
    detail::UnionFind sets(nv);

    if (weld_eps > 0) {
        std::unordered_map<detail::CellKey, std::vector<int>, detail::CellKeyHash> grid;
        const double eps2 = weld_eps * weld_eps;
        for (std::size_t v = 0; v < nv; ++v) {
            const detail::CellKey cell = detail::cell_of(mesh.vertices[v], weld_eps);
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dz = -1; dz <= 1; ++dz) {
                        auto it = grid.find({cell.x + dx, cell.y + dy, cell.z + dz});
                        if (it == grid.end()) continue;
                        for (int u : it->second) {
                            if ((mesh.vertices[u] - mesh.vertices[v]).squaredNorm() <= eps2) {
                                sets.unite(u, static_cast<int>(v));
                            }
                        }
                    }
                }
            }
            grid[cell].push_back(static_cast<int>(v));
        }
    } else {
        std::map<std::array<double, 3>, int> exact;
        for (std::size_t v = 0; v < nv; ++v) {
            const auto key = std::array<double, 3>{mesh.vertices[v].x(), mesh.vertices[v].y(), mesh.vertices[v].z()};
            auto [it, inserted] = exact.emplace(key, static_cast<int>(v));
            if (!inserted) sets.unite(it->second, static_cast<int>(v));
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (sets.find(static_cast<int>(v)) != static_cast<int>(v)) ++stats.vertices_welded;
    }

    std::vector<Face> faces;
    faces.reserve(mesh.faces.size());
    std::set<std::array<int, 3>> seen;
    for (const Face& f : mesh.faces) {
        Face g{sets.find(f[0]), sets.find(f[1]), sets.find(f[2])};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) {
            ++stats.degenerate_faces;
            continue;
        }
        std::array<int, 3> sorted = g;
        std::sort(sorted.begin(), sorted.end());
        if (!seen.insert(sorted).second) {
            ++stats.duplicate_faces;
            continue;
        }
        faces.push_back(g);
    }

    std::vector<int> remap(nv, -1);
    for (const Face& f : faces) {
        for (int v : f) remap[v] = 0;
    }
    std::vector<Vec3> vertices;
    std::vector<Rgb> colors;
    for (std::size_t v = 0; v < nv; ++v) {
        if (sets.find(static_cast<int>(v)) != static_cast<int>(v)) continue;
        if (remap[v] < 0) {
            ++stats.unreferenced_removed;
            continue;
        }
        remap[v] = static_cast<int>(vertices.size());
        vertices.push_back(mesh.vertices[v]);
        if (mesh.has_colors()) colors.push_back(mesh.colors[v]);
    }
    for (Face& f : faces) {
        for (int& v : f) v = remap[v];
    }
    mesh.vertices = std::move(vertices);
    mesh.faces = std::move(faces);
    mesh.colors = std::move(colors);

    if (log) {
        log->add("dedup", "vertices_welded", stats.vertices_welded);
        log->add("dedup", "unreferenced_vertices_removed", stats.unreferenced_removed);
        log->add("dedup", "degenerate_faces_removed", stats.degenerate_faces);
        log->add("dedup", "duplicate_faces_removed", stats.duplicate_faces);
    }
    return stats;
}

}  // namespace gngwt
