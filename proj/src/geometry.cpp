#include "certipose/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace certipose {

Eigen::Matrix<double, 6, 1> Pose::vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << x, y, z, thetaX, thetaY, thetaZ;
  return v;
}

Pose Pose::fromVector(const Eigen::VectorXd& v) {
  if (v.size() != 6) throw std::invalid_argument("pose vector must have 6 entries");
  return {v(0), v(1), v(2), v(3), v(4), v(5)};
}

void CameraParams::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) throw std::invalid_argument("focal length must be > 0");
  if (width < 1 || height < 1) throw std::invalid_argument("image size must be positive");
}

ConvexPolygon3::ConvexPolygon3(Eigen::Matrix3Xd vertices) : vertices_(std::move(vertices)) {
  const Eigen::Index v = vertices_.cols();
  if (v < 3) throw InvalidGeometry("polygon needs at least 3 vertices");
  if (!vertices_.allFinite()) throw InvalidGeometry("polygon vertex is not finite");
  // Newell normal
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < v; ++i) {
    const Eigen::Vector3d a = vertices_.col(i);
    const Eigen::Vector3d b = vertices_.col((i + 1) % v);
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  if (n.norm() < 1e-12) throw InvalidGeometry("polygon has zero area");
  normal_ = n.normalized();
  planeOffset_ = normal_.dot(vertices_.rowwise().mean());
  for (Eigen::Index i = 0; i < v; ++i)
    if (std::abs(normal_.dot(vertices_.col(i)) - planeOffset_) > 1e-9)
      throw InvalidGeometry("polygon vertices are not coplanar");
  for (Eigen::Index i = 0; i < v; ++i) {
    const Eigen::Vector3d e1 = vertices_.col((i + 1) % v) - vertices_.col(i);
    const Eigen::Vector3d e2 = vertices_.col((i + 2) % v) - vertices_.col((i + 1) % v);
    if (normal_.dot(e1.cross(e2)) <= 1e-12) throw InvalidGeometry("polygon is not strictly convex");
  }
}

Eigen::Matrix3d intrinsic_matrix(const CameraParams& cam) {
  Eigen::Matrix3d K;
  K << cam.focal, 0, cam.width / 2.0, 0, cam.focal, cam.height / 2.0, 0, 0, 1;
  return K;
}

Eigen::Matrix3d rotation_matrix(double tx, double ty, double tz) {
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, std::cos(tx), -std::sin(tx), 0, std::sin(tx), std::cos(tx);
  ry << std::cos(ty), 0, std::sin(ty), 0, 1, 0, -std::sin(ty), 0, std::cos(ty);
  rz << std::cos(tz), -std::sin(tz), 0, std::sin(tz), std::cos(tz), 0, 0, 0, 1;
  return rx * ry * rz;
}

Projection project(const CameraParams& cam, const Pose& pose, const Eigen::Matrix3Xd& tcf) {
  const Eigen::Matrix3d R = rotation_matrix(pose.thetaX, pose.thetaY, pose.thetaZ);
  const Eigen::Vector3d T(pose.x, pose.y, pose.z);
  Projection out;
  out.ccf = intrinsic_matrix(cam) * ((R * tcf).colwise() + T);
  out.pcf.resize(2, tcf.cols());
  for (Eigen::Index k = 0; k < tcf.cols(); ++k) {
    const double depth = out.ccf(2, k);
    if (!(depth > kDepthEps)) throw BehindCamera("vertex at or behind the camera plane");
    out.pcf(0, k) = out.ccf(0, k) / depth;
    out.pcf(1, k) = out.ccf(1, k) / depth;
  }
  return out;
}

bool polygon_box_intersect(const Polygon2& poly, const Eigen::Vector2d& lo,
                           const Eigen::Vector2d& hi) {
  const Eigen::Index n = poly.cols();
  if (n == 0) return false;
  if (poly.row(0).maxCoeff() < lo.x() || poly.row(0).minCoeff() > hi.x() ||
      poly.row(1).maxCoeff() < lo.y() || poly.row(1).minCoeff() > hi.y())
    return false;
  const Eigen::Vector2d c = 0.5 * (lo + hi);
  const Eigen::Vector2d r = 0.5 * (hi - lo);
  const Eigen::Index edges = n == 2 ? 1 : n;
  for (Eigen::Index i = 0; i < edges && n > 1; ++i) {
    const Eigen::Vector2d e = poly.col((i + 1) % n) - poly.col(i);
    const Eigen::Vector2d a(-e.y(), e.x());
    if (a.squaredNorm() == 0.0) continue;
    const Eigen::VectorXd proj = a.transpose() * poly;
    const double boxC = a.dot(c);
    const double boxR = std::abs(a.x()) * r.x() + std::abs(a.y()) * r.y();
    if (proj.maxCoeff() < boxC - boxR || proj.minCoeff() > boxC + boxR) return false;
  }
  return true;
}

bool polygon_pixel_intersect(const Polygon2& poly, Pixel p) {
  return polygon_box_intersect(poly, pixel_lo(p), pixel_hi(p));
}

namespace {
template <class Fn>
void forEachPixelInBounds(const Polygon2& poly, const CameraParams& cam, Fn&& fn) {
  if (poly.cols() == 0) return;
  const double x0 = poly.row(0).minCoeff(), x1 = poly.row(0).maxCoeff();
  const double y0 = poly.row(1).minCoeff(), y1 = poly.row(1).maxCoeff();
  const int qx0 = std::max(1, static_cast<int>(std::ceil(x0 - 0.5)));
  const int qx1 = std::min(cam.width, static_cast<int>(std::floor(x1 + 0.5)));
  const int qy0 = std::max(1, static_cast<int>(std::ceil(y0 - 0.5)));
  const int qy1 = std::min(cam.height, static_cast<int>(std::floor(y1 + 0.5)));
  for (int qy = qy0; qy <= qy1; ++qy)
    for (int qx = qx0; qx <= qx1; ++qx) fn(Pixel{qx, qy});
}
}  // namespace

BinaryImage rasterize(const std::vector<Polygon2>& polys, const CameraParams& cam) {
  BinaryImage img(cam.width, cam.height);
  for (const auto& poly : polys)
    forEachPixelInBounds(poly, cam, [&](Pixel p) {
      if (!img.get(p) && polygon_pixel_intersect(poly, p)) img.set(p.qx, p.qy);
    });
  return img;
}

BinaryImage edge_pixels(const std::vector<Polygon2>& polys, const CameraParams& cam) {
  BinaryImage img(cam.width, cam.height);
  for (const auto& poly : polys) {
    const Eigen::Index n = poly.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
      Polygon2 seg(2, 2);
      seg.col(0) = poly.col(i);
      seg.col(1) = poly.col((i + 1) % n);
      forEachPixelInBounds(seg, cam, [&](Pixel p) {
        if (!img.get(p) && polygon_pixel_intersect(seg, p)) img.set(p.qx, p.qy);
      });
    }
  }
  return img;
}

bool HPolytope2::contains(const Eigen::Vector2d& x, double tol) const {
  return ((A * x - b).array() <= tol).all();
}

bool polytope_box_overlap_outer(const HPolytope2& P, const Eigen::Vector2d& lo,
                                const Eigen::Vector2d& hi, double tol) {
  const Eigen::Vector2d c = 0.5 * (lo + hi);
  const Eigen::Vector2d r = 0.5 * (hi - lo);
  for (Eigen::Index i = 0; i < P.A.rows(); ++i) {
    const double ax = P.A(i, 0), ay = P.A(i, 1);
    const double minOverBox = ax * c.x() + ay * c.y() - std::abs(ax) * r.x() - std::abs(ay) * r.y();
    if (minOverBox > P.b(i) + tol) return false;
  }
  return true;
}

Eigen::Matrix2Xd convex_hull_vertices(const Eigen::Matrix2Xd& points) {
  std::vector<Eigen::Vector2d> pts(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) pts[i] = points.col(i);
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    Eigen::Matrix2Xd out(2, pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out.col(i) = pts[i];
    return out;
  }
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  Eigen::Matrix2Xd out(2, hull.size());
  for (std::size_t i = 0; i < hull.size(); ++i) out.col(i) = hull[i];
  return out;
}

HPolytope2 convex_hull_points(const Eigen::Matrix2Xd& points) {
  if (points.cols() == 0) throw std::invalid_argument("convex hull of no points");
  const Eigen::Matrix2Xd hv = convex_hull_vertices(points);
  HPolytope2 P;
  if (hv.cols() == 1) {
    P.A.resize(4, 2);
    P.A << 1, 0, -1, 0, 0, 1, 0, -1;
    P.b.resize(4);
    P.b << hv(0, 0) + kHullSlab, -hv(0, 0) + kHullSlab, hv(1, 0) + kHullSlab,
        -hv(1, 0) + kHullSlab;
    return P;
  }
  if (hv.cols() == 2) {
    const Eigen::Vector2d p = hv.col(0), q = hv.col(1);
    const Eigen::Vector2d u = (q - p).normalized();
    const Eigen::Vector2d n(-u.y(), u.x());
    P.A.resize(4, 2);
    P.A.row(0) = n.transpose();
    P.A.row(1) = -n.transpose();
    P.A.row(2) = u.transpose();
    P.A.row(3) = -u.transpose();
    P.b.resize(4);
    P.b << n.dot(p) + kHullSlab, -n.dot(p) + kHullSlab, u.dot(q) + kHullSlab,
        -u.dot(p) + kHullSlab;
    return P;
  }
  const Eigen::Index m = hv.cols();
  P.A.resize(m, 2);
  P.b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Vector2d e = hv.col((i + 1) % m) - hv.col(i);
    const Eigen::Vector2d n = Eigen::Vector2d(e.y(), -e.x()).normalized();
    P.A.row(i) = n.transpose();
    // the max over all points keeps every input point feasible despite rounding
    P.b(i) = (n.transpose() * points).maxCoeff();
  }
  return P;
}

Eigen::Vector3d refpoint_reconstruct(const Eigen::Matrix3d& R, const Eigen::Vector3d& p) {
  const Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod(R);
  const Eigen::Vector3d lambda = cod.solve(p);
  if (!lambda.allFinite() || (R * lambda - p).norm() > 1e-9)
    throw SingularReference("point is not reachable from the reference points");
  return lambda;
}

}  // namespace certipose
