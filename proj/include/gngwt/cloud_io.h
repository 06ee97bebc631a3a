#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gngwt/types.h"

namespace gngwt {

/// Point positions in meters with optional per-point colors.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Rgb> colors;  // empty, or same length as points

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_colors() const { return !colors.empty(); }
};

/// Throws InvalidArgument if a coordinate is non-finite or the color count mismatches.
void validate(const PointCloud& cloud);

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Reads the "vertex" element of an ASCII or binary little-endian PLY file.
/// Colors are populated only when red, green and blue are all declared.
PointCloud load_ply(const std::filesystem::path& path);

/// Reads vertices, optional vertex colors and the "face" element.
/// Polygons with more than three corners are fan-triangulated.
TriangleMesh load_mesh_ply(const std::filesystem::path& path);

void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
              PlyFormat format = PlyFormat::BinaryLittleEndian);
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path,
              PlyFormat format = PlyFormat::BinaryLittleEndian);
/// Writes "v" and "f" records only.
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Writes PLY or OBJ depending on the file extension (".ply" / ".obj").
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Axis-aligned bounding-box diagonal length; 0 for an empty cloud.
double bounding_box_diagonal(const std::vector<Vec3>& points);

/// Median over all points of the distance to the nearest other point.
/// Requires at least two points.
double median_nn_spacing(const PointCloud& cloud);

struct PrototypeShape {
    static constexpr double kCuboidX = 1.0;
    static constexpr double kCuboidY = 0.8;
    static constexpr double kCuboidZ = 0.6;
    static constexpr double kSphereRadius = 0.35;
    static constexpr double kTorusMajor = 0.3;
    static constexpr double kTorusMinor = 0.1;

    static Vec3 sphere_center() { return {0.0, 0.0, kCuboidZ / 2}; }
    static Vec3 torus_center() { return {kCuboidX / 2, 0.0, 0.0}; }

    /// Signed distance to the union solid (negative inside).
    static double signed_distance(const Vec3& p);
    static double cuboid_distance(const Vec3& p);
    static double sphere_distance(const Vec3& p);
    static double torus_distance(const Vec3& p);
};

enum class Primitive : std::uint8_t { Cuboid, Sphere, Torus };

struct LabeledCloud {
    PointCloud cloud;
    std::vector<Primitive> source;  // primitive each point was sampled from
};

/// Noise-free exterior surface samples of the prototype object: a 1.0 x 0.8 x 0.6 m
/// cuboid centered at the origin, a sphere (r = 0.35 m) centered on its +z face and a
/// torus (R = 0.3 m, r = 0.1 m, axis along z) centered on its +x face.
/// Each primitive receives round(density * area) candidate samples; candidates inside
/// another primitive are discarded.
LabeledCloud generate_prototype_labeled(double samples_per_unit_area, std::uint64_t seed);
PointCloud generate_prototype(double samples_per_unit_area, std::uint64_t seed);

}  // namespace gngwt
