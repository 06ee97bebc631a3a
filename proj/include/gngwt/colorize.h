#pragma once

#include "gngwt/cloud_io.h"
#include "gngwt/mesh_ops.h"
#include "gngwt/spatial_index.h"

namespace gngwt {

/// Gives every mesh vertex the color of its nearest cloud point; geometry is untouched.
/// A cloud without colors leaves the mesh as is and records a warning in the log.
/// Returns false in that case.
bool restore_colors(TriangleMesh& mesh, const PointCloud& cloud, const SpatialIndex& index,
                    RepairLog* log = nullptr);

}  // namespace gngwt
