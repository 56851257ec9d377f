#pragma once

// Image enclosure of a target seen from every pose in an axis-aligned box.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "certipose/binary_image.hpp"
#include "certipose/geometry.hpp"
#include "certipose/set_core.hpp"
#include "certipose/target.hpp"

namespace certipose {

/// Factor ids of the six pose dimensions (x, y, z, thetaX, thetaY, thetaZ).
inline const IdList kPoseIds{1, 2, 3, 4, 5, 6};
inline constexpr int kPoseDim = 6;

enum class Execution { Serial, Parallel };

class InvisibleCandidate : public std::runtime_error {
 public:
  enum class Reason { BehindCamera, EmptyImage };
  InvisibleCandidate(Reason r, const std::string& what) : std::runtime_error(what), reason(r) {}
  Reason reason;
};

/// Pose box U = o + G B with diagonal G over the pose factor ids.
struct UncertainPose {
  Interval box;

  UncertainPose() = default;
  explicit UncertainPose(Interval b);

  PolyZonotope set() const { return make_box(box, kPoseIds); }
  Vec center() const { return box.center(); }
  Vec radius() const { return box.radius(); }
  bool contains(const Vec& p, double tol = 0.0) const { return box.contains(p, tol); }
};

struct VertexEnclosure {
  PolyZonotope set;  // in pixel coordinates
  Eigen::Vector2d linOffset = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 2, kPoseDim> linGen = Eigen::Matrix<double, 2, kPoseDim>::Zero();
  Mat errGens;         // 2 x e, dependent error columns then independent ones
  BinaryImage bitmap;  // pixels whose square meets the interval hull of set
  bool insideImage = false;

  /// Fills the decomposition, bitmap and flag from `set`.
  static VertexEnclosure fromSet(PolyZonotope set, const CameraParams& cam);
  Interval hull() const { return interval_hull(set); }
  /// Sum of interval-hull radii of the error and linear parts.
  double errorRadius() const;
  double linearRadius() const;
};

struct HullConfig {
  bool edgeNormals = true;    // directions orthogonal to consecutive offsets
  bool centerDirections = true;
  bool refine = true;         // one round re-aimed at support-realising points

  bool operator==(const HullConfig&) const = default;
};

struct PoseCandidateArtifacts {
  UncertainPose pose;
  BinaryImage outerImage;
  std::vector<BinaryImage> polygonImages;
  std::vector<HPolytope2> hulls;
  std::vector<std::vector<VertexEnclosure>> vertices;  // [polygon][vertex]
  double errorRatio = 0.0;
  /// Set for boxes that may contain poses with the target behind the camera.
  /// Such candidates have an all-ones outer image and carry no vertex data.
  bool conservative = false;

  std::size_t numVertices() const;
};

struct ForwardStats {
  std::size_t pixelTests = 0;
};

MatPolyZonotope enclose_rotation(const UncertainPose& U);

/// Per polygon, per vertex pixel-coordinate sets. Throws InvisibleCandidate
/// when a depth interval reaches the camera plane.
std::vector<std::vector<PolyZonotope>> enclose_vertices(const Target& target, const UncertainPose& U,
                                                        const CameraParams& cam);

HPolytope2 hull_enclose(const std::vector<PolyZonotope>& vertexSets, const HullConfig& cfg = {});

/// Pixels whose square is not excluded by a halfspace of the hull, restricted
/// to the bounding box [lo, hi] in pixel coordinates.
BinaryImage rasterize_outer(const HPolytope2& hull, const Eigen::Vector2d& lo,
                            const Eigen::Vector2d& hi, const CameraParams& cam,
                            Execution exec = Execution::Serial, ForwardStats* stats = nullptr);

PoseCandidateArtifacts forward_enclose(const Target& target, const UncertainPose& U,
                                       const CameraParams& cam, const HullConfig& cfg = {},
                                       Execution exec = Execution::Serial,
                                       ForwardStats* stats = nullptr);

/// Artifacts for a box that may be partly behind the camera.
PoseCandidateArtifacts conservative_artifacts(const UncertainPose& U, const Target& target,
                                              const CameraParams& cam);

/// Mean over vertices of errorRadius / linearRadius.
double error_ratio(const std::vector<std::vector<VertexEnclosure>>& vertices);

}  // namespace certipose
