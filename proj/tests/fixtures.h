#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gngwt/cloud_io.h"
#include "gngwt/gng.h"
#include "gngwt/types.h"

namespace fixtures {

using gngwt::PointCloud;
using gngwt::TriangleMesh;
using gngwt::Vec3;

/// Closed axis-aligned cube [0, edge]^3, each side split into n x n quads (12 n^2 faces),
/// outward winding.
TriangleMesh cube(int n = 1, double edge = 1.0);

/// Cube without its top side (z = edge); the boundary is the top rim.
TriangleMesh open_top_cube(int n = 1, double edge = 1.0);

/// Box [0,sx]x[0,sy]x[0,sz] without its bottom side (z = 0).
TriangleMesh open_bottom_box(int n, double sx, double sy, double sz);

TriangleMesh icosahedron();
TriangleMesh tetrahedron(const Vec3& offset = Vec3::Zero());

/// Tube of radius r and height h around the z axis, both ends open.
TriangleMesh open_cylinder(int segments, int rings, double r = 0.5, double h = 1.0);

/// Five-triangle twisted strip; its edge pairs cannot be oriented consistently.
TriangleMesh mobius_strip();

/// Reverses the winding of face f.
void flip_face(TriangleMesh& mesh, std::size_t f);

// Surface samplers (uniform by area, deterministic for a seed).
PointCloud sample_open_cube(std::size_t n, std::uint64_t seed);
PointCloud sample_open_cylinder(std::size_t n, std::uint64_t seed);
PointCloud sample_punctured_sphere(std::size_t n, std::uint64_t seed);
PointCloud sample_open_bottom_box(std::size_t n, std::uint64_t seed);
PointCloud sample_torus(std::size_t n, std::uint64_t seed);
PointCloud sample_unit_sphere(std::size_t n, std::uint64_t seed);

/// Prototype cloud with the lowest 20% of points (by z) removed.
PointCloud without_bottom(const PointCloud& cloud, double fraction = 0.2);

/// Fresh path inside a per-process scratch directory.
std::filesystem::path temp_path(const std::string& name);

/// Writes `text` to `path` verbatim.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Random graph on `n` vertices in the unit cube; each pair connected with probability p.
gngwt::GngModel random_graph(int n, double p, std::uint64_t seed);

}  // namespace fixtures
