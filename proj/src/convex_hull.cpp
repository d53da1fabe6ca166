#include "lesionmetrics/convex_hull.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "lesionmetrics/rng.hpp"

namespace lesionmetrics {
namespace {

struct V3 {
  std::int64_t x, y, z;
};

V3 sub(const Index3& a, const Index3& b) { return {a.i - b.i, a.j - b.j, a.k - b.k}; }
V3 cross(const V3& a, const V3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
std::int64_t dot(const V3& a, const V3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Sign of det[b-a, c-a, d-a]. Lattice coordinates are below 2^16, so the
// determinant fits comfortably in 64 bits.
std::int64_t orient(const Index3& a, const Index3& b, const Index3& c, const Index3& d) {
  return dot(cross(sub(b, a), sub(c, a)), sub(d, a));
}

// Keeps points that are the first or last along each of the three axis
// lines through them. Any extreme point of the set passes all three tests.
std::vector<Index3> line_extremes(std::vector<Index3> pts) {
  auto filter_axis = [](std::vector<Index3>& v, auto key_major, auto key_minor) {
    std::sort(v.begin(), v.end(), [&](const Index3& a, const Index3& b) {
      const auto ka = key_major(a), kb = key_major(b);
      if (ka != kb) return ka < kb;
      return key_minor(a) < key_minor(b);
    });
    std::vector<Index3> kept;
    kept.reserve(v.size());
    for (std::size_t s = 0; s < v.size();) {
      std::size_t e = s + 1;
      while (e < v.size() && key_major(v[e]) == key_major(v[s])) ++e;
      kept.push_back(v[s]);
      if (e - 1 != s) kept.push_back(v[e - 1]);
      s = e;
    }
    v.swap(kept);
  };
  using P = std::pair<std::int64_t, std::int64_t>;
  filter_axis(pts, [](const Index3& p) { return P{p.i, p.j}; }, [](const Index3& p) { return p.k; });
  filter_axis(pts, [](const Index3& p) { return P{p.i, p.k}; }, [](const Index3& p) { return p.j; });
  filter_axis(pts, [](const Index3& p) { return P{p.j, p.k}; }, [](const Index3& p) { return p.i; });
  std::sort(pts.begin(), pts.end());
  return pts;
}

std::vector<Index3> hull_2d(const std::vector<Index3>& pts, const V3& normal) {
  // Drop the coordinate with the largest normal component; the projection
  // is a bijection on the plane and preserves convexity.
  const std::int64_t ax = std::abs(normal.x), ay = std::abs(normal.y), az = std::abs(normal.z);
  const int drop = (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
  auto uv = [drop](const Index3& p) -> std::pair<std::int64_t, std::int64_t> {
    if (drop == 0) return {p.j, p.k};
    if (drop == 1) return {p.i, p.k};
    return {p.i, p.j};
  };
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return uv(pts[a]) < uv(pts[b]); });
  auto turn = [&](std::size_t o, std::size_t a, std::size_t b) {
    const auto [ou, ov] = uv(pts[o]);
    const auto [au, av] = uv(pts[a]);
    const auto [bu, bv] = uv(pts[b]);
    return (au - ou) * (bv - ov) - (av - ov) * (bu - ou);
  };
  std::vector<std::size_t> chain(2 * order.size());
  std::size_t k = 0;
  for (std::size_t idx : order) {
    while (k >= 2 && turn(chain[k - 2], chain[k - 1], idx) <= 0) --k;
    chain[k++] = idx;
  }
  for (std::size_t t = order.size() - 1, lower = k + 1; t-- > 0;) {
    const std::size_t idx = order[t];
    while (k >= lower && turn(chain[k - 2], chain[k - 1], idx) <= 0) --k;
    chain[k++] = idx;
  }
  chain.resize(k - 1);
  std::vector<Index3> out;
  for (std::size_t idx : chain) out.push_back(pts[idx]);
  std::sort(out.begin(), out.end());
  return out;
}

struct Face {
  std::uint32_t a, b, c;
  bool alive = true;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

}  // namespace

std::vector<Index3> convex_hull_vertices(std::span<const Index3> input) {
  std::vector<Index3> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  pts = line_extremes(std::move(pts));
  if (pts.size() <= 2) return pts;

  // Initial simplex.
  const std::size_t i0 = 0;
  std::size_t i1 = pts.size() - 1;  // lexicographic max differs from min
  std::size_t i2 = pts.size();
  V3 best_normal{0, 0, 0};
  std::int64_t best_norm = 0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const V3 nrm = cross(sub(pts[i1], pts[i0]), sub(pts[n], pts[i0]));
    const std::int64_t mag = std::abs(nrm.x) + std::abs(nrm.y) + std::abs(nrm.z);
    if (mag > best_norm) {
      best_norm = mag;
      best_normal = nrm;
      i2 = n;
    }
  }
  if (i2 == pts.size()) return {pts[i0], pts[i1]};  // collinear: lexicographic extremes are the endpoints

  std::size_t i3 = pts.size();
  std::int64_t best_vol = 0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const std::int64_t vol = std::abs(orient(pts[i0], pts[i1], pts[i2], pts[n]));
    if (vol > best_vol) {
      best_vol = vol;
      i3 = n;
    }
  }
  if (i3 == pts.size()) return hull_2d(pts, best_normal);

  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_face;
  auto add_face = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const auto id = static_cast<std::uint32_t>(faces.size());
    faces.push_back({a, b, c});
    edge_face[edge_key(a, b)] = id;
    edge_face[edge_key(b, c)] = id;
    edge_face[edge_key(c, a)] = id;
  };
  {
    const std::uint32_t s[4] = {static_cast<std::uint32_t>(i0), static_cast<std::uint32_t>(i1),
                                static_cast<std::uint32_t>(i2), static_cast<std::uint32_t>(i3)};
    const int tri[4][4] = {{0, 1, 2, 3}, {0, 3, 1, 2}, {0, 2, 3, 1}, {1, 3, 2, 0}};
    for (const auto& t : tri) {
      std::uint32_t a = s[t[0]], b = s[t[1]], c = s[t[2]];
      if (orient(pts[a], pts[b], pts[c], pts[s[t[3]]]) > 0) std::swap(b, c);
      add_face(a, b, c);
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t n = 0; n < pts.size(); ++n)
    if (n != i0 && n != i1 && n != i2 && n != i3) order.push_back(n);
  Rng rng(0x5eed);
  for (std::size_t n = order.size(); n > 1; --n)
    std::swap(order[n - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))]);

  std::vector<std::uint32_t> visible;
  std::vector<std::uint8_t> is_visible;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
  for (std::size_t idx : order) {
    const Index3& p = pts[idx];
    visible.clear();
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
      const Face& face = faces[f];
      if (face.alive && orient(pts[face.a], pts[face.b], pts[face.c], p) > 0) visible.push_back(f);
    }
    if (visible.empty()) continue;

    is_visible.assign(faces.size(), 0);
    for (std::uint32_t f : visible) is_visible[f] = 1;
    horizon.clear();
    for (std::uint32_t f : visible) {
      const Face& face = faces[f];
      const std::uint32_t e[3][2] = {{face.a, face.b}, {face.b, face.c}, {face.c, face.a}};
      for (const auto& edge : e) {
        const std::uint32_t twin = edge_face.at(edge_key(edge[1], edge[0]));
        if (!is_visible[twin]) horizon.emplace_back(edge[0], edge[1]);
      }
    }
    for (std::uint32_t f : visible) {
      Face& face = faces[f];
      face.alive = false;
      edge_face.erase(edge_key(face.a, face.b));
      edge_face.erase(edge_key(face.b, face.c));
      edge_face.erase(edge_key(face.c, face.a));
    }
    const auto pi = static_cast<std::uint32_t>(idx);
    for (const auto& [a, b] : horizon) add_face(a, b, pi);

    // Compact occasionally so the visibility scan stays proportional to the hull.
    if (faces.size() > 64 && edge_face.size() * 2 < faces.size() * 3) {
      std::vector<Face> live;
      for (const Face& f : faces)
        if (f.alive) live.push_back(f);
      faces.clear();
      edge_face.clear();
      for (const Face& f : live) add_face(f.a, f.b, f.c);
    }
  }

  std::vector<std::uint8_t> used(pts.size(), 0);
  for (const Face& f : faces)
    if (f.alive) used[f.a] = used[f.b] = used[f.c] = 1;
  std::vector<Index3> out;
  for (std::size_t n = 0; n < pts.size(); ++n)
    if (used[n]) out.push_back(pts[n]);
  return out;
}

}  // namespace lesionmetrics
