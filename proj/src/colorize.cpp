#include "gngwt/colorize.h"

#include "gngwt/error.h"

namespace gngwt {

bool restore_colors(TriangleMesh& mesh, const PointCloud& cloud, const SpatialIndex& index, RepairLog* log) {
    if (!cloud.has_colors()) {
        if (log) log->add("restore_colors", "warning_cloud_without_colors", 0);
        return false;
    }
    if (index.size() != cloud.size()) {
        throw InvalidArgument("restore_colors: index was not built from this cloud");
    }
    mesh.colors.resize(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        mesh.colors[v] = cloud.colors[static_cast<std::size_t>(index.nearest(mesh.vertices[v]).index)];
    }
    if (log) log->add("restore_colors", "vertices_colored", mesh.vertices.size());
    return true;
}

}  // namespace gngwt
