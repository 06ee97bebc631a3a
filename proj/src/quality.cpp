#include "gngwt/quality.h"

#include <algorithm>
#include <cmath>

#include "gngwt/error.h"

namespace gngwt {

double eta(const TriangleMesh& mesh) {
    if (mesh.faces.empty()) {
        throw InvalidArgument("eta: mesh has no faces");
    }
    double ratio_sum = 0.0;
    for (const Face& f : mesh.faces) {
        const double a = (mesh.vertices[f[0]] - mesh.vertices[f[1]]).norm();
        const double b = (mesh.vertices[f[1]] - mesh.vertices[f[2]]).norm();
        const double c = (mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
        const double longest = std::max({a, b, c});
        if (!(longest > 0)) {
            throw InvalidArgument("eta: degenerate face with zero-length edges");
        }
        ratio_sum += std::min({a, b, c}) / longest;
    }
    return 1.0 - ratio_sum / static_cast<double>(mesh.faces.size());
}

bool theta(const QualityScores& prev, const QualityScores& next) {
    return (next.epsilon < prev.epsilon && next.eta <= prev.eta) ||
           (next.epsilon <= prev.epsilon && next.eta < prev.eta);
}

double hausdorff_oracle(const std::vector<Vec3>& cloud, const std::vector<Vec3>& mesh_vertices) {
    if (cloud.empty() || mesh_vertices.empty()) {
        throw InvalidArgument("hausdorff_oracle: both point sets must be non-empty");
    }
    auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        double worst = 0.0;
        for (const Vec3& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(cloud, mesh_vertices), directed(mesh_vertices, cloud));
}

}  // namespace gngwt
