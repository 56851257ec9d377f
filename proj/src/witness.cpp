#include "certipose/witness.hpp"

#include <algorithm>
#include <numeric>

namespace certipose {

namespace {

Eigen::Vector2d centerOf(Pixel p) { return {static_cast<double>(p.qx), static_cast<double>(p.qy)}; }

bool rowMajorLess(Pixel a, Pixel b) { return a.qy < b.qy || (a.qy == b.qy && a.qx < b.qx); }

WitnessSet withPixels(const WitnessSet& W, std::vector<Pixel> px, Tightening t) {
  std::sort(px.begin(), px.end(), rowMajorLess);
  return {std::move(px), W.vertexRegion, t};
}

Eigen::Matrix2Xd squareCorners(std::span<const Pixel> px) {
  Eigen::Matrix2Xd pts(2, 4 * static_cast<Eigen::Index>(px.size()));
  Eigen::Index c = 0;
  for (const Pixel& p : px)
    for (double dx : {-0.5, 0.5})
      for (double dy : {-0.5, 0.5}) pts.col(c++) << p.qx + dx, p.qy + dy;
  return pts;
}

}  // namespace

WitnessSet collect_witnesses(const BinaryImage& obs, const BinaryImage& vertexRegion) {
  WitnessSet W;
  W.pixels = (obs & vertexRegion).onPixels();
  if (W.pixels.empty()) throw EmptyWitness("no observed on-pixel inside the vertex region");
  W.vertexRegion = vertexRegion;
  return W;
}

bool is_standalone(const BinaryImage& vertexRegion, std::span<const BinaryImage> otherVertexRegions,
                   std::span<const BinaryImage> otherPolygonHulls) {
  for (const auto& r : otherVertexRegions)
    if (vertexRegion.intersects(r)) return false;
  for (const auto& h : otherPolygonHulls)
    if (vertexRegion.intersects(h)) return false;
  return true;
}

WitnessSet tighten_boundary(const WitnessSet& W, const Eigen::Vector2d& outwardDir, std::size_t mu,
                            const BinaryImage& obs) {
  if (mu >= W.pixels.size()) return withPixels(W, W.pixels, Tightening::Boundary);
  std::vector<std::size_t> order(W.pixels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outwardDir.dot(centerOf(W.pixels[a])) > outwardDir.dot(centerOf(W.pixels[b]));
  });
  BinaryImage remaining = obs;
  std::vector<Pixel> keep;
  for (std::size_t i = 0; i < mu; ++i) {
    const Pixel p = W.pixels[order[i]];
    keep.push_back(p);
    remaining.set(p.qx, p.qy, false);
  }
  for (std::size_t i = mu; i < order.size(); ++i) {
    const Pixel p = W.pixels[order[i]];
    bool boundary = false;
    for (int dy = -1; dy <= 1 && !boundary; ++dy)
      for (int dx = -1; dx <= 1 && !boundary; ++dx) {
        if (!dx && !dy) continue;
        const int nx = p.qx + dx, ny = p.qy + dy;
        boundary = !remaining.inBounds(nx, ny) || !remaining.get(nx, ny);
      }
    if (boundary) keep.push_back(p);
  }
  if (keep.empty()) throw EmptyWitness("no boundary pixel inside the vertex region");
  return withPixels(W, std::move(keep), Tightening::Boundary);
}

WitnessSet triangle_filter(const WitnessSet& W, const Eigen::Vector2d& edgeTangent,
                           const BinaryImage& obs) {
  const auto& px = W.pixels;
  if (px.size() <= 1) return withPixels(W, px, Tightening::BoundaryTriangle);

  std::vector<Pixel> tips;
  for (const Pixel& p : px)
    if (obs.onNeighbours(p.qx, p.qy) == 1) tips.push_back(p);
  if (tips.size() == 1) return withPixels(W, tips, Tightening::BoundaryTriangle);

  auto proj = [&](Pixel p) { return edgeTangent.dot(centerOf(p)); };
  // Extremes along the tangent. Pixels within one pixel width of either
  // extreme all count, so a slightly tilted tangent cannot pick a single
  // arbitrary corner of a flat run.
  double lo = proj(px.front()), hi = lo;
  for (const Pixel& p : px) {
    lo = std::min(lo, proj(p));
    hi = std::max(hi, proj(p));
  }
  const double band = kTriangleExtremeBand * edgeTangent.norm();
  std::vector<Pixel> extremes;
  for (const Pixel& p : px)
    if (proj(p) <= lo + band || proj(p) >= hi - band) extremes.push_back(p);
  std::vector<Pixel> keep;
  for (const Pixel& q : px) {
    std::vector<Pixel> tri = extremes;
    tri.push_back(q);
    const Polygon2 hull = convex_hull_vertices(squareCorners(tri));
    bool coversAll = true;
    for (const Pixel& other : px) {
      if (other == q) continue;
      if (!polygon_pixel_intersect(hull, other)) {
        coversAll = false;
        break;
      }
    }
    if (coversAll) keep.push_back(q);
  }
  if (keep.empty()) throw EmptyWitness("no witness pixel passes the triangle test");
  return withPixels(W, std::move(keep), Tightening::BoundaryTriangle);
}

bool region_meets_segment_hull(const BinaryImage& region, const Interval& a, const Interval& b) {
  Eigen::Matrix2Xd pts(2, 8);
  Eigen::Index c = 0;
  for (const Interval* box : {&a, &b})
    for (int corner = 0; corner < 4; ++corner)
      pts.col(c++) << (corner & 1 ? box->hi(0) : box->lo(0)), (corner & 2 ? box->hi(1) : box->lo(1));
  const Polygon2 hull = convex_hull_vertices(pts);
  for (const Pixel& p : region.onPixels())
    if (polygon_pixel_intersect(hull, p)) return true;
  return false;
}

bool meets_other_edges(const BinaryImage& region, std::span<const Interval> vertexHulls, std::size_t k) {
  const std::size_t n = vertexHulls.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t j2 = (j + 1) % n;
    if (j == k || j2 == k) continue;
    if (region_meets_segment_hull(region, vertexHulls[j], vertexHulls[j2])) return true;
  }
  return false;
}

Eigen::Vector2d vertex_outward(const Eigen::Vector2d& prev, const Eigen::Vector2d& v,
                               const Eigen::Vector2d& next) {
  const Eigen::Vector2d u1 = (prev - v).normalized(), u2 = (next - v).normalized();
  const Eigen::Vector2d s = u1 + u2;
  if (s.norm() > 1e-9) return -s.normalized();
  // collinear neighbours: any edge normal
  return Eigen::Vector2d(u2.y(), -u2.x());
}

HPolytope2 witness_polytope(const WitnessSet& W) {
  if (W.pixels.empty()) throw EmptyWitness("witness polytope of an empty set");
  return convex_hull_points(squareCorners(W.pixels));
}

}  // namespace certipose
