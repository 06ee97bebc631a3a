#include "fixtures.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <map>
#include <numbers>
#include <random>

namespace fixtures {

using gngwt::Face;

namespace {

constexpr double kPi = std::numbers::pi;

// Builds the requested sides of an n x n x n lattice box scaled to `size`.
// side index: 2 * axis + (0 for the low side, 1 for the high side).
TriangleMesh lattice_box(int n, const Vec3& size, const std::array<bool, 6>& sides) {
    TriangleMesh mesh;
    std::map<std::array<int, 3>, int> ids;
    auto vertex = [&](std::array<int, 3> c) {
        auto [it, fresh] = ids.emplace(c, static_cast<int>(mesh.vertices.size()));
        if (fresh) {
            mesh.vertices.emplace_back(size.x() * c[0] / n, size.y() * c[1] / n, size.z() * c[2] / n);
        }
        return it->second;
    };
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        for (int high = 0; high < 2; ++high) {
            if (!sides[2 * axis + high]) continue;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    std::array<int, 4> q;
                    const int corners[4][2] = {{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}};
                    for (int k = 0; k < 4; ++k) {
                        std::array<int, 3> c{};
                        c[axis] = high ? n : 0;
                        c[u] = corners[k][0];
                        c[v] = corners[k][1];
                        q[k] = vertex(c);
                    }
                    if (high) {
                        mesh.faces.push_back({q[0], q[1], q[2]});
                        mesh.faces.push_back({q[0], q[2], q[3]});
                    } else {
                        mesh.faces.push_back({q[0], q[2], q[1]});
                        mesh.faces.push_back({q[0], q[3], q[2]});
                    }
                }
            }
        }
    }
    return mesh;
}

Vec3 uniform_direction(gngwt::Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        const Vec3 d(g(rng), g(rng), g(rng));
        const double n = d.norm();
        if (n > 1e-12) return d / n;
    }
}

// Uniform sample on an axis-aligned box surface, skipping the sides marked false.
PointCloud sample_box(std::size_t count, const Vec3& lo, const Vec3& hi, const std::array<bool, 6>& sides,
                      std::uint64_t seed) {
    gngwt::Rng rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Vec3 ext = hi - lo;
    std::array<double, 6> area{};
    for (int axis = 0; axis < 3; ++axis) {
        const double a = ext[(axis + 1) % 3] * ext[(axis + 2) % 3];
        area[2 * axis] = sides[2 * axis] ? a : 0.0;
        area[2 * axis + 1] = sides[2 * axis + 1] ? a : 0.0;
    }
    std::discrete_distribution<int> pick(area.begin(), area.end());
    PointCloud cloud;
    cloud.points.reserve(count);
    while (cloud.points.size() < count) {
        const int side = pick(rng);
        const int axis = side / 2;
        Vec3 p(lo.x() + u01(rng) * ext.x(), lo.y() + u01(rng) * ext.y(), lo.z() + u01(rng) * ext.z());
        p[axis] = side % 2 ? hi[axis] : lo[axis];
        cloud.points.push_back(p);
    }
    return cloud;
}

}  // namespace

TriangleMesh cube(int n, double edge) {
    return lattice_box(n, Vec3::Constant(edge), {true, true, true, true, true, true});
}

TriangleMesh open_top_cube(int n, double edge) {
    return lattice_box(n, Vec3::Constant(edge), {true, true, true, true, true, false});
}

TriangleMesh open_bottom_box(int n, double sx, double sy, double sz) {
    return lattice_box(n, Vec3(sx, sy, sz), {true, true, true, true, false, true});
}

TriangleMesh icosahedron() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    return m;
}

TriangleMesh tetrahedron(const Vec3& offset) {
    TriangleMesh m;
    m.vertices = {offset, offset + Vec3(1, 0, 0), offset + Vec3(0, 1, 0), offset + Vec3(0, 0, 1)};
    m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
    return m;
}

TriangleMesh open_cylinder(int segments, int rings, double r, double h) {
    TriangleMesh m;
    for (int k = 0; k <= rings; ++k) {
        for (int j = 0; j < segments; ++j) {
            const double a = 2 * kPi * j / segments;
            m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), h * k / rings);
        }
    }
    auto id = [segments](int k, int j) { return k * segments + (j % segments); };
    for (int k = 0; k < rings; ++k) {
        for (int j = 0; j < segments; ++j) {
            m.faces.push_back({id(k, j), id(k, j + 1), id(k + 1, j + 1)});
            m.faces.push_back({id(k, j), id(k + 1, j + 1), id(k + 1, j)});
        }
    }
    return m;
}

TriangleMesh mobius_strip() {
    TriangleMesh m;
    for (int i = 0; i < 5; ++i) {
        const double a = 2 * kPi * i / 5;
        m.vertices.emplace_back(std::cos(a), std::sin(a), (i % 2) * 0.3);
    }
    for (int i = 0; i < 5; ++i) m.faces.push_back({i, (i + 1) % 5, (i + 2) % 5});
    return m;
}

void flip_face(TriangleMesh& mesh, std::size_t f) { std::swap(mesh.faces[f][1], mesh.faces[f][2]); }

PointCloud sample_open_cube(std::size_t n, std::uint64_t seed) {
    return sample_box(n, Vec3::Constant(-0.4), Vec3::Constant(0.4), {true, true, true, true, true, false}, seed);
}

PointCloud sample_open_bottom_box(std::size_t n, std::uint64_t seed) {
    return sample_box(n, Vec3(-0.45, -0.3, 0.0), Vec3(0.45, 0.3, 0.5), {true, true, true, true, false, true}, seed);
}

PointCloud sample_open_cylinder(std::size_t n, std::uint64_t seed) {
    gngwt::Rng rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2 * kPi * u01(rng);
        cloud.points.emplace_back(0.3 * std::cos(a), 0.3 * std::sin(a), 0.8 * u01(rng));
    }
    return cloud;
}

PointCloud sample_punctured_sphere(std::size_t n, std::uint64_t seed) {
    gngwt::Rng rng(seed);
    PointCloud cloud;
    const double cap = std::cos(kPi / 6);  // hole of 30 degrees half-angle around +z
    while (cloud.points.size() < n) {
        const Vec3 d = uniform_direction(rng);
        if (d.z() > cap) continue;
        cloud.points.push_back(0.4 * d);
    }
    return cloud;
}

PointCloud sample_torus(std::size_t n, std::uint64_t seed) {
    gngwt::Rng rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double R = 0.35;
    const double r = 0.12;
    PointCloud cloud;
    while (cloud.points.size() < n) {
        const double theta = 2 * kPi * u01(rng);
        const double phi = 2 * kPi * u01(rng);
        if (u01(rng) * (R + r) > R + r * std::cos(phi)) continue;
        const double w = R + r * std::cos(phi);
        cloud.points.emplace_back(w * std::cos(theta), w * std::sin(theta), r * std::sin(phi));
    }
    return cloud;
}

PointCloud sample_unit_sphere(std::size_t n, std::uint64_t seed) {
    gngwt::Rng rng(seed);
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) cloud.points.push_back(uniform_direction(rng));
    return cloud;
}

PointCloud without_bottom(const PointCloud& cloud, double fraction) {
    std::vector<std::size_t> order(cloud.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cloud.points[a].z() < cloud.points[b].z(); });
    const auto drop = static_cast<std::size_t>(fraction * static_cast<double>(cloud.size()));
    std::vector<char> keep(cloud.size(), 1);
    for (std::size_t i = 0; i < drop; ++i) keep[order[i]] = 0;
    PointCloud out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!keep[i]) continue;
        out.points.push_back(cloud.points[i]);
        if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
    }
    return out;
}

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("gngwt_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

gngwt::GngModel random_graph(int n, double p, std::uint64_t seed) {
    gngwt::Rng rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    gngwt::GngModel g;
    for (int i = 0; i < n; ++i) g.add_neuron(Vec3(u01(rng), u01(rng), u01(rng)));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (u01(rng) < p) g.connect(i, j);
        }
    }
    return g;
}

}  // namespace fixtures
