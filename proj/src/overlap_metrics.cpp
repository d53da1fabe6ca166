#include "lesionmetrics/overlap_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "lesionmetrics/error.hpp"
#include "lesionmetrics/surface.hpp"

namespace lesionmetrics {
namespace {

constexpr std::size_t kLeafSize = 8;

// Nearest-neighbour search over lattice points with physical distances.
class KdTree {
 public:
  KdTree(std::span<const Index3> points, const Vec3& spacing) : points_(points.begin(), points.end()), spacing_(spacing) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }

  /// Smallest squared distance from q to the tree's points. The search may
  /// stop early once it has found a distance <= stop_at; a result > stop_at
  /// is always the exact minimum.
  double nearest(const Index3& q, double stop_at) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, q, stop_at, best);
    return best;
  }

 private:
  struct Node {
    Index3 lo, hi;
    std::size_t begin, end;
    std::size_t left = 0, right = 0;  // 0 marks a leaf (root is never a child)
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({});
    Index3 lo = points_[begin], hi = points_[begin];
    for (std::size_t n = begin + 1; n < end; ++n) {
      const Index3& p = points_[n];
      lo = {std::min(lo.i, p.i), std::min(lo.j, p.j), std::min(lo.k, p.k)};
      hi = {std::max(hi.i, p.i), std::max(hi.j, p.j), std::max(hi.k, p.k)};
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    const double ext[3] = {static_cast<double>(hi.i - lo.i) * spacing_[0], static_cast<double>(hi.j - lo.j) * spacing_[1],
                           static_cast<double>(hi.k - lo.k) * spacing_[2]};
    const int axis = ext[0] >= ext[1] && ext[0] >= ext[2] ? 0 : (ext[1] >= ext[2] ? 1 : 2);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + static_cast<std::ptrdiff_t>(begin), points_.begin() + static_cast<std::ptrdiff_t>(mid),
                     points_.begin() + static_cast<std::ptrdiff_t>(end), [axis](const Index3& a, const Index3& b) {
                       return axis == 0 ? a.i < b.i : axis == 1 ? a.j < b.j : a.k < b.k;
                     });
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  double box_bound(const Node& node, const Index3& q) const {
    auto axis_gap = [](std::int64_t v, std::int64_t lo, std::int64_t hi) -> std::int64_t {
      return v < lo ? lo - v : (v > hi ? v - hi : 0);
    };
    const double dx = static_cast<double>(axis_gap(q.i, node.lo.i, node.hi.i)) * spacing_[0];
    const double dy = static_cast<double>(axis_gap(q.j, node.lo.j, node.hi.j)) * spacing_[1];
    const double dz = static_cast<double>(axis_gap(q.k, node.lo.k, node.hi.k)) * spacing_[2];
    return dx * dx + dy * dy + dz * dz;
  }

  void search(std::size_t id, const Index3& q, double stop_at, double& best) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
      for (std::size_t n = node.begin; n < node.end; ++n) {
        best = std::min(best, squared_distance_mm(points_[n], q, spacing_));
        if (best <= stop_at) return;
      }
      return;
    }
    double bl = box_bound(nodes_[node.left], q);
    double br = box_bound(nodes_[node.right], q);
    std::size_t first = node.left, second = node.right;
    if (br < bl) {
      std::swap(first, second);
      std::swap(bl, br);
    }
    if (bl < best) search(first, q, stop_at, best);
    if (best <= stop_at) return;
    if (br < best) search(second, q, stop_at, best);
  }

  std::vector<Index3> points_;
  Vec3 spacing_;
  std::vector<Node> nodes_;
};

double directed_squared(std::span<const Index3> from, const KdTree& to) {
  double worst = 0.0;
  for (const Index3& p : from) {
    const double d2 = to.nearest(p, worst);
    if (d2 > worst) worst = d2;
  }
  return worst;
}

}  // namespace

std::size_t intersection_size(std::span<const VoxelIndex> a, std::span<const VoxelIndex> b) {
  std::size_t shared = 0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return shared;
}

double dice(std::span<const VoxelIndex> a, std::span<const VoxelIndex> b) {
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(intersection_size(a, b)) / static_cast<double>(a.size() + b.size());
}

double dice(const LabelVolume& a, const LabelVolume& b) {
  assert_same_grid(a, b);
  const auto va = a.voxels(), vb = b.voxels();
  std::size_t na = 0, nb = 0, shared = 0;
  for (std::size_t n = 0; n < va.size(); ++n) {
    const bool fa = va[n] != 0, fb = vb[n] != 0;
    na += fa;
    nb += fb;
    shared += fa && fb;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(shared) / static_cast<double>(na + nb);
}

double hausdorff_points(std::span<const Index3> a, std::span<const Index3> b, const Vec3& spacing) {
  if (a.empty() || b.empty()) throw Error("undefined HD: empty voxel set");
  const KdTree tree_a(a, spacing), tree_b(b, spacing);
  return std::sqrt(std::max(directed_squared(a, tree_b), directed_squared(b, tree_a)));
}

double hausdorff(std::span<const VoxelIndex> a, std::span<const VoxelIndex> b, const GridGeometry& geometry) {
  if (a.empty() || b.empty()) throw Error("undefined HD: empty voxel set");
  return hausdorff_points(boundary_voxels(a, geometry), boundary_voxels(b, geometry), geometry.spacing);
}

double hausdorff(const LabelVolume& a, const LabelVolume& b) {
  assert_same_grid(a, b);
  return hausdorff_points(boundary_voxels(a), boundary_voxels(b), a.geometry().spacing);
}

std::vector<PairScores> per_pair_scores(const MatchResult& matches, std::span<const LesionInstance> gt,
                                        std::span<const LesionInstance> pred, const GridGeometry& geometry) {
  std::map<int, const LesionInstance*> gt_by_id, pred_by_id;
  for (const auto& inst : gt) gt_by_id[inst.id] = &inst;
  for (const auto& inst : pred) pred_by_id[inst.id] = &inst;
  std::vector<PairScores> out;
  out.reserve(matches.pairs.size());
  for (const MatchedPair& pair : matches.pairs) {
    const auto g = gt_by_id.find(pair.gt_id);
    const auto p = pred_by_id.find(pair.pred_id);
    if (g == gt_by_id.end() || p == pred_by_id.end())
      throw Error("matched pair (" + std::to_string(pair.gt_id) + ", " + std::to_string(pair.pred_id) +
                  ") references an unknown lesion");
    const auto& a = g->second->voxels;
    const auto& b = p->second->voxels;
    out.push_back({pair.gt_id, pair.pred_id, {dice(a, b), hausdorff(a, b, geometry)}});
  }
  return out;
}

}  // namespace lesionmetrics
