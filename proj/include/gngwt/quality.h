#pragma once

#include <limits>
#include <vector>

#include "gngwt/types.h"

namespace gngwt {

/// Consistency error (meters) and mean edge length ratio of a reconstruction.
struct QualityScores {
    double epsilon = std::numeric_limits<double>::infinity();
    double eta = 1.0;

    /// Score assigned to failed reconstructions; dominated by every finite score.
    static QualityScores failure() { return {}; }
    bool finite() const { return epsilon < std::numeric_limits<double>::infinity(); }

    friend bool operator==(const QualityScores&, const QualityScores&) = default;
};

/// 1 - mean over faces of (shortest edge / longest edge). Throws InvalidArgument for a mesh
/// without faces or with a face whose longest edge has zero length.
double eta(const TriangleMesh& mesh);

/// True iff `next` improves one criterion strictly without degrading the other.
bool theta(const QualityScores& prev, const QualityScores& next);

/// Symmetric max-min distance between two point sets, by exhaustive comparison.
/// Diagnostic only: far too slow for the optimization loop.
double hausdorff_oracle(const std::vector<Vec3>& cloud, const std::vector<Vec3>& mesh_vertices);

}  // namespace gngwt
