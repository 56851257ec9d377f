#pragma once

// Witness pixels: observed on-pixels that must contain a projected vertex.

#include <span>
#include <stdexcept>
#include <vector>

#include "certipose/binary_image.hpp"
#include "certipose/geometry.hpp"
#include "certipose/set_core.hpp"

namespace certipose {

class EmptyWitness : public std::runtime_error {
 public:
  explicit EmptyWitness(const std::string& what) : std::runtime_error(what) {}
};

enum class Tightening { None, Boundary, BoundaryTriangle };

struct WitnessSet {
  std::vector<Pixel> pixels;  // sorted by (qy, qx)
  BinaryImage vertexRegion;
  Tightening tightened = Tightening::None;
};

/// On-pixels of obs inside the region. Throws EmptyWitness if there are none.
WitnessSet collect_witnesses(const BinaryImage& obs, const BinaryImage& vertexRegion);

bool is_standalone(const BinaryImage& vertexRegion, std::span<const BinaryImage> otherVertexRegions,
                   std::span<const BinaryImage> otherPolygonHulls);

/// Keeps the mu pixels farthest along outwardDir plus every remaining pixel
/// with an 8-neighbour outside the remaining set. The remaining set is the
/// observed on-pixels minus those mu pixels; neighbours outside the image are
/// absent.
WitnessSet tighten_boundary(const WitnessSet& W, const Eigen::Vector2d& outwardDir, std::size_t mu,
                            const BinaryImage& obs);

/// True when some pixel of the region meets the convex hull of the two boxes.
/// With a and b the enclosures of an edge's endpoints, every pixel the edge
/// can cross lies in that hull.
bool region_meets_segment_hull(const BinaryImage& region, const Interval& a, const Interval& b);

/// Checks region_meets_segment_hull against every edge of the polygon that
/// does not end at vertex k. vertexHulls are the polygon's vertex boxes in
/// order.
bool meets_other_edges(const BinaryImage& region, std::span<const Interval> vertexHulls, std::size_t k);

/// Bisector of the exterior angle at v: minus the sum of the unit vectors
/// towards the neighbouring vertices. Falls back to the edge normal when the
/// two neighbours are collinear with v.
Eigen::Vector2d vertex_outward(const Eigen::Vector2d& prev, const Eigen::Vector2d& v,
                               const Eigen::Vector2d& next);

/// Projections along the tangent within this many pixels of the extreme count
/// as extreme.
inline constexpr double kTriangleExtremeBand = 1.0;

/// Noise-free only. Drops q when the hull of the squares of q and the extreme
/// pixels along edgeTangent misses another witness square. A unique witness
/// with exactly one on 8-neighbour in obs is returned alone.
WitnessSet triangle_filter(const WitnessSet& W, const Eigen::Vector2d& edgeTangent,
                           const BinaryImage& obs);

/// Convex hull of the witness squares.
HPolytope2 witness_polytope(const WitnessSet& W);

}  // namespace certipose
