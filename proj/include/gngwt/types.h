#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gngwt {

using Vec3 = Eigen::Vector3d;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using Face = std::array<int, 3>;

/// Indexed triangle mesh. `colors` is either empty or holds one entry per vertex.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<Rgb> colors;

    bool has_colors() const { return !colors.empty(); }
};

}  // namespace gngwt
