#pragma once

#include <span>
#include <vector>

#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

/// Vertices of the convex hull of a set of integer lattice points, computed
/// with exact integer predicates. Coplanar, collinear and single-point inputs
/// are handled; the result holds every extreme point exactly once (sorted),
/// and may additionally hold a few non-extreme points lying on hull faces.
std::vector<Index3> convex_hull_vertices(std::span<const Index3> points);

}  // namespace lesionmetrics
