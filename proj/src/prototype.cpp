#include <cmath>
#include <numbers>
#include <random>

#include "gngwt/cloud_io.h"
#include "gngwt/error.h"

namespace gngwt {

namespace {

using std::numbers::pi;

std::size_t sample_count(double density, double area) {
    return static_cast<std::size_t>(std::llround(density * area));
}

}  // namespace

double PrototypeShape::cuboid_distance(const Vec3& p) {
    const Vec3 half(kCuboidX / 2, kCuboidY / 2, kCuboidZ / 2);
    const Vec3 q = p.cwiseAbs() - half;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
}

double PrototypeShape::sphere_distance(const Vec3& p) {
    return (p - sphere_center()).norm() - kSphereRadius;
}

double PrototypeShape::torus_distance(const Vec3& p) {
    const Vec3 q = p - torus_center();
    const double ring = std::hypot(q.x(), q.y()) - kTorusMajor;
    return std::hypot(ring, q.z()) - kTorusMinor;
}

double PrototypeShape::signed_distance(const Vec3& p) {
    return std::min({cuboid_distance(p), sphere_distance(p), torus_distance(p)});
}

LabeledCloud generate_prototype_labeled(double samples_per_unit_area, std::uint64_t seed) {
    if (!(samples_per_unit_area > 0) || !std::isfinite(samples_per_unit_area)) {
        throw InvalidArgument("generate_prototype: density must be positive");
    }
    using S = PrototypeShape;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    LabeledCloud out;
    auto emit = [&](const Vec3& p, Primitive source) {
        const bool interior = (source != Primitive::Cuboid && S::cuboid_distance(p) <= 0) ||
                              (source != Primitive::Sphere && S::sphere_distance(p) <= 0) ||
                              (source != Primitive::Torus && S::torus_distance(p) <= 0);
        if (!interior) {
            out.cloud.points.push_back(p);
            out.source.push_back(source);
        }
    };

    // Cuboid: each of the six faces sampled proportionally to its area.
    const double half[3] = {S::kCuboidX / 2, S::kCuboidY / 2, S::kCuboidZ / 2};
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        const double area = 4 * half[u] * half[v];
        for (double side : {-1.0, 1.0}) {
            const std::size_t n = sample_count(samples_per_unit_area, area);
            for (std::size_t i = 0; i < n; ++i) {
                Vec3 p;
                p[axis] = side * half[axis];
                p[u] = (2 * unit(rng) - 1) * half[u];
                p[v] = (2 * unit(rng) - 1) * half[v];
                emit(p, Primitive::Cuboid);
            }
        }
    }

    const std::size_t n_sphere = sample_count(samples_per_unit_area, 4 * pi * S::kSphereRadius * S::kSphereRadius);
    for (std::size_t i = 0; i < n_sphere; ++i) {
        Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
        while (dir.squaredNorm() < 1e-24) dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
        emit(S::sphere_center() + S::kSphereRadius * dir.normalized(), Primitive::Sphere);
    }

    // Torus: area element is proportional to (R + r cos(tube angle)).
    const double R = S::kTorusMajor;
    const double r = S::kTorusMinor;
    const std::size_t n_torus = sample_count(samples_per_unit_area, 4 * pi * pi * R * r);
    for (std::size_t i = 0; i < n_torus; ++i) {
        double tube = 0.0;
        do {
            tube = 2 * pi * unit(rng);
        } while (unit(rng) * (R + r) > R + r * std::cos(tube));
        const double ring = 2 * pi * unit(rng);
        const double rad = R + r * std::cos(tube);
        emit(S::torus_center() + Vec3(rad * std::cos(ring), rad * std::sin(ring), r * std::sin(tube)),
             Primitive::Torus);
    }
    return out;
}

PointCloud generate_prototype(double samples_per_unit_area, std::uint64_t seed) {
    return generate_prototype_labeled(samples_per_unit_area, seed).cloud;
}

}  // namespace gngwt
