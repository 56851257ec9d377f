#pragma once

// Concrete geometry: target polygons, the pinhole camera, exact rasterization
// and a few 2-D polytope primitives.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "certipose/binary_image.hpp"

namespace certipose {

using Polygon2 = Eigen::Matrix2Xd;  // columns are vertices

class BehindCamera : public std::domain_error {
 public:
  explicit BehindCamera(const std::string& what) : std::domain_error(what) {}
};

class SingularReference : public std::domain_error {
 public:
  explicit SingularReference(const std::string& what) : std::domain_error(what) {}
};

class InvalidGeometry : public std::invalid_argument {
 public:
  explicit InvalidGeometry(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr double kDepthEps = 1e-9;

struct Pose {
  double x = 0, y = 0, z = 0;
  double thetaX = 0, thetaY = 0, thetaZ = 0;

  Eigen::Matrix<double, 6, 1> vector() const;
  static Pose fromVector(const Eigen::VectorXd& v);
};

struct CameraParams {
  double focal = 1.0;
  int width = 1;
  int height = 1;

  void validate() const;
  bool operator==(const CameraParams&) const = default;
};

/// Planar convex polygon in target coordinates. The plane normal is derived
/// from the vertices so that the winding is counter-clockwise around it.
class ConvexPolygon3 {
 public:
  explicit ConvexPolygon3(Eigen::Matrix3Xd vertices);

  const Eigen::Matrix3Xd& vertices() const { return vertices_; }
  const Eigen::Vector3d& normal() const { return normal_; }
  double planeOffset() const { return planeOffset_; }
  Eigen::Index numVertices() const { return vertices_.cols(); }

 private:
  Eigen::Matrix3Xd vertices_;
  Eigen::Vector3d normal_;
  double planeOffset_ = 0.0;
};

Eigen::Matrix3d intrinsic_matrix(const CameraParams& cam);
Eigen::Matrix3d rotation_matrix(double thetaX, double thetaY, double thetaZ);

struct Projection {
  Eigen::Matrix3Xd ccf;
  Polygon2 pcf;
};

Projection project(const CameraParams& cam, const Pose& pose, const Eigen::Matrix3Xd& tcf);

/// Square covered by pixel (qx, qy).
inline Eigen::Vector2d pixel_lo(Pixel p) { return {p.qx - 0.5, p.qy - 0.5}; }
inline Eigen::Vector2d pixel_hi(Pixel p) { return {p.qx + 0.5, p.qy + 0.5}; }

/// Exact separating-axis test of a convex polygon (points, segments allowed)
/// against a closed axis-aligned box.
bool polygon_box_intersect(const Polygon2& poly, const Eigen::Vector2d& lo,
                           const Eigen::Vector2d& hi);
bool polygon_pixel_intersect(const Polygon2& poly, Pixel p);

BinaryImage rasterize(const std::vector<Polygon2>& polys, const CameraParams& cam);

/// Pixels touched by any polygon edge segment.
BinaryImage edge_pixels(const std::vector<Polygon2>& polys, const CameraParams& cam);

struct HPolytope2 {
  Eigen::Matrix<double, Eigen::Dynamic, 2> A;
  Eigen::VectorXd b;

  Eigen::Index numHalfspaces() const { return A.rows(); }
  bool contains(const Eigen::Vector2d& x, double tol = 1e-9) const;
};

/// False only if a single halfspace excludes the whole box.
bool polytope_box_overlap_outer(const HPolytope2& P, const Eigen::Vector2d& lo,
                                const Eigen::Vector2d& hi, double tol = 1e-9);

/// H-representation of conv(points) with unit-norm rows. Degenerate inputs
/// are inflated by kHullSlab.
inline constexpr double kHullSlab = 1e-9;
HPolytope2 convex_hull_points(const Eigen::Matrix2Xd& points);
/// Counter-clockwise extreme points (monotone chain).
Eigen::Matrix2Xd convex_hull_vertices(const Eigen::Matrix2Xd& points);

/// Solves R * lambda = p. Rank-deficient R is accepted when p lies in its range.
Eigen::Vector3d refpoint_reconstruct(const Eigen::Matrix3d& R, const Eigen::Vector3d& p);

}  // namespace certipose
