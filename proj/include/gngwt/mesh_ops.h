#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gngwt/types.h"

namespace gngwt {

class GngModel;

/// Plain-text repair log, one "stage,action,count" line per entry.
class RepairLog {
public:
    void add(std::string_view stage, std::string_view action, std::size_t count);
    const std::vector<std::string>& lines() const { return lines_; }
    std::string str() const;

private:
    std::vector<std::string> lines_;
};

/// Proximity of the edge pair (i, j) and (j, k) sharing vertex j: the smaller of the distance
/// from v_i to segment [v_j, v_k] and from v_k to segment [v_i, v_j]. Zero exactly when one
/// edge folds onto the other.
double edge_pair_proximity(const Vec3& vi, const Vec3& vj, const Vec3& vk);

/// Close-by edge removal on the graph. Visits vertex chains (i, j, k), k != i, in ascending
/// index order and removes edge (j, k) whenever both edges still exist and their proximity is
/// below t_p. Returns the number of removed edges.
std::size_t remove_close_edges(GngModel& graph, double t_p);

/// Adds the shorter diagonal of every chordless 4-cycle so quads become two triangles.
/// Returns the number of edges added.
std::size_t complete_quads(GngModel& graph);

/// Keeps a single connected, consistently oriented, vertex-manifold patch of the triangle soup
/// (each edge in at most two faces, each vertex a single fan). The patch is grown face by face
/// from the best-shaped seed, preferring the flattest continuation across each boundary edge.
/// Unreferenced vertices are dropped. Returns the number of discarded faces.
std::size_t extract_manifold(TriangleMesh& mesh, RepairLog* log = nullptr);

/// Closed cycle of vertices; consecutive pairs are boundary edges. Traversal order is the
/// winding a face filling the hole must use.
struct BoundaryLoop {
    std::vector<int> vertices;
};

/// Throws TopologyError when a boundary vertex has more than one outgoing boundary edge.
std::vector<BoundaryLoop> boundary_loops(const TriangleMesh& mesh);

struct HoleFillStats {
    std::size_t loops_closed = 0;
    std::size_t faces_added = 0;
    std::size_t fan_fallbacks = 0;  // loops closed around a new centroid vertex
};

/// Triangulates every boundary loop: loop vertices are projected onto their least-squares
/// plane and the resulting polygon is ear-clipped. Ears whose diagonal already exists in the
/// mesh are skipped. Non-simple projections (or polygons with no admissible ear) are closed
/// by a fan around a new vertex at the loop centroid.
HoleFillStats fill_holes(TriangleMesh& mesh, RepairLog* log = nullptr);

struct DedupStats {
    std::size_t vertices_welded = 0;
    std::size_t unreferenced_removed = 0;
    std::size_t degenerate_faces = 0;
    std::size_t duplicate_faces = 0;
};

/// Welds vertices within weld_eps (union-find over a hash grid), drops degenerate faces and
/// faces equal as unordered vertex sets, and removes vertices referenced by no face.
DedupStats dedup(TriangleMesh& mesh, double weld_eps, RepairLog* log = nullptr);

/// Makes the winding consistent across face adjacency and flips each connected component
/// so its signed volume is positive. Returns the number of flipped faces. Throws TopologyError
/// for edges with more than two faces or non-orientable components.
std::size_t orient(TriangleMesh& mesh, RepairLog* log = nullptr);

/// Quadric-error edge collapses until face count <= target_faces, rejecting collapses that
/// would break the closed-manifold property. Returns the achieved face count.
std::size_t simplify(TriangleMesh& mesh, std::size_t target_faces, RepairLog* log = nullptr);

struct WatertightReport {
    std::size_t vertices = 0;  // referenced by at least one face
    std::size_t edges = 0;
    std::size_t faces = 0;
    std::size_t boundary_edges = 0;
    std::size_t non_manifold_edges = 0;
    std::size_t components = 0;
    bool consistently_oriented = false;
    long euler_characteristic = 0;
    double signed_volume = 0.0;

    bool watertight() const {
        return boundary_edges == 0 && non_manifold_edges == 0 && components == 1 && consistently_oriented &&
               signed_volume > 0;
    }
    /// "key: value" lines.
    std::string str() const;
};

WatertightReport watertight_report(const TriangleMesh& mesh);

double signed_volume(const TriangleMesh& mesh);

}  // namespace gngwt
