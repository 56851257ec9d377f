#include "certipose/pose_forward.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "certipose/nonlin_enclosure.hpp"

namespace certipose {

using Eigen::Index;

UncertainPose::UncertainPose(Interval b) : box(std::move(b)) {
  if (box.dim() != kPoseDim) throw DimensionMismatch("pose box must be 6-dimensional");
}

// -- vertex decomposition --------------------------------------------------------

namespace {

struct PixelRange {
  int qx0, qx1, qy0, qy1;
  bool empty() const { return qx0 > qx1 || qy0 > qy1; }
};

PixelRange pixelRange(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, const CameraParams& cam) {
  auto clampLo = [](double v) {
    return static_cast<int>(std::max(-1e9, std::ceil(v - 0.5)));
  };
  auto clampHi = [](double v) {
    return static_cast<int>(std::min(1e9, std::floor(v + 0.5)));
  };
  return {std::max(1, clampLo(lo.x())), std::min(cam.width, clampHi(hi.x())),
          std::max(1, clampLo(lo.y())), std::min(cam.height, clampHi(hi.y()))};
}

}  // namespace

VertexEnclosure VertexEnclosure::fromSet(PolyZonotope set, const CameraParams& cam) {
  if (set.dim() != 2) throw DimensionMismatch("vertex enclosure must be 2-dimensional");
  VertexEnclosure v;
  IdList inputs;
  std::set_intersection(kPoseIds.begin(), kPoseIds.end(), set.ids().begin(), set.ids().end(),
                        std::back_inserter(inputs));
  const LinearErrorSplit split = split_linear_error(set, inputs);
  v.linOffset = split.linear.offset();
  for (Index c = 0; c < split.linear.numDep(); ++c) {
    Index row = 0;
    split.linear.exponents().col(c).maxCoeff(&row);
    const int id = split.linear.ids()[static_cast<std::size_t>(row)];
    const auto it = std::find(kPoseIds.begin(), kPoseIds.end(), id);
    v.linGen.col(it - kPoseIds.begin()) += split.linear.dep().col(c);
  }
  v.errGens.resize(2, split.error.numDep() + split.error.numIndep());
  v.errGens << split.error.dep(), split.error.indep();

  const Interval ih = interval_hull(set);
  v.insideImage = ih.lo(0) >= 0.5 && ih.lo(1) >= 0.5 && ih.hi(0) <= cam.width + 0.5 &&
                  ih.hi(1) <= cam.height + 0.5;
  v.bitmap = BinaryImage(cam.width, cam.height);
  const PixelRange r = pixelRange(ih.lo, ih.hi, cam);
  for (int qy = r.qy0; qy <= r.qy1; ++qy)
    for (int qx = r.qx0; qx <= r.qx1; ++qx) v.bitmap.set(qx, qy);
  v.set = std::move(set);
  return v;
}

double VertexEnclosure::errorRadius() const { return errGens.cwiseAbs().sum(); }
double VertexEnclosure::linearRadius() const { return linGen.cwiseAbs().sum(); }

std::size_t PoseCandidateArtifacts::numVertices() const {
  std::size_t n = 0;
  for (const auto& p : vertices) n += p.size();
  return n;
}

double error_ratio(const std::vector<std::vector<VertexEnclosure>>& vertices) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& poly : vertices)
    for (const auto& v : poly) {
      const double lin = v.linearRadius();
      const double err = v.errorRadius();
      sum += err == 0.0 ? 0.0 : (lin > 0.0 ? err / lin : std::numeric_limits<double>::infinity());
      ++n;
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

// -- rotation and vertices -------------------------------------------------------

MatPolyZonotope enclose_rotation(const UncertainPose& U) {
  const PolyZonotope pose = U.set();
  const std::array<Index, 3> angleRows{3, 4, 5};
  const PolyZonotope angles = index(pose, angleRows);
  const PolyZonotope S = enclose_elementwise(ScalarFunction::Sin, angles);
  const PolyZonotope C = enclose_elementwise(ScalarFunction::Cos, angles);

  auto pattern = [](std::initializer_list<double> v) {
    Mat m(3, 3);
    auto it = v.begin();
    for (Index r = 0; r < 3; ++r)
      for (Index c = 0; c < 3; ++c) m(r, c) = *it++;
    return m;
  };
  auto elementary = [&](Index axis, const Mat& fixed, const Mat& cosPat, const Mat& sinPat) {
    return mink_sum(MatPolyZonotope::constant(fixed),
                    mink_sum(scalar_times(index(C, axis), cosPat), scalar_times(index(S, axis), sinPat)));
  };
  const MatPolyZonotope Rx = elementary(0, pattern({1, 0, 0, 0, 0, 0, 0, 0, 0}),
                                        pattern({0, 0, 0, 0, 1, 0, 0, 0, 1}),
                                        pattern({0, 0, 0, 0, 0, -1, 0, 1, 0}));
  const MatPolyZonotope Ry = elementary(1, pattern({0, 0, 0, 0, 1, 0, 0, 0, 0}),
                                        pattern({1, 0, 0, 0, 0, 0, 0, 0, 1}),
                                        pattern({0, 0, 1, 0, 0, 0, -1, 0, 0}));
  const MatPolyZonotope Rz = elementary(2, pattern({0, 0, 0, 0, 0, 0, 0, 0, 1}),
                                        pattern({1, 0, 0, 0, 1, 0, 0, 0, 0}),
                                        pattern({0, -1, 0, 1, 0, 0, 0, 0, 0}));
  return mat_mul(compact(Rx), mat_mul(compact(Ry), compact(Rz)));
}

std::vector<std::vector<PolyZonotope>> enclose_vertices(const Target& target, const UncertainPose& U,
                                                        const CameraParams& cam) {
  const MatPolyZonotope R = enclose_rotation(U);
  const std::array<Index, 3> transRows{0, 1, 2};
  const PolyZonotope T = index(U.set(), transRows);
  const Mat K = intrinsic_matrix(cam);
  const std::array<Index, 2> xy{0, 1};

  std::vector<std::vector<PolyZonotope>> out;
  out.reserve(target.numPolygons());
  for (const auto& poly : target.polygons()) {
    const Index v = poly.numVertices();
    const MatPolyZonotope ccf =
        linear_map(K, mink_sum(right_multiply(R, poly.vertices()), repeat_columns(T, v)));
    std::vector<PolyZonotope> verts;
    verts.reserve(static_cast<std::size_t>(v));
    for (Index k = 0; k < v; ++k) {
      const PolyZonotope col = compact(ccf.column(k));
      const PolyZonotope depth = index(col, 2);
      if (interval_hull(depth).lo(0) <= kDepthEps)
        throw InvisibleCandidate(InvisibleCandidate::Reason::BehindCamera,
                                 "target may be at or behind the camera plane");
      const PolyZonotope inv = enclose_elementwise(ScalarFunction::Reciprocal, depth);
      const MatPolyZonotope pcf =
          mat_mul(MatPolyZonotope::fromVector(index(col, xy)), MatPolyZonotope::fromVector(inv));
      verts.push_back(pcf.toVector());
    }
    out.push_back(std::move(verts));
  }
  return out;
}

// -- hull ------------------------------------------------------------------------

HPolytope2 hull_enclose(const std::vector<PolyZonotope>& sets, const HullConfig& cfg) {
  const std::size_t v = sets.size();
  if (v == 0) throw std::invalid_argument("hull_enclose: no vertex sets");
  std::vector<Eigen::Vector2d> c(v);
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (std::size_t k = 0; k < v; ++k) {
    if (sets[k].dim() != 2) throw DimensionMismatch("hull_enclose: sets must be 2-dimensional");
    c[k] = sets[k].offset();
    center += c[k];
  }
  center /= static_cast<double>(v);

  std::vector<Eigen::Vector2d> dirs;
  std::vector<Eigen::Vector2d> edgeDirs(v, Eigen::Vector2d::Zero());
  auto addDir = [&](Eigen::Vector2d a) {
    const double n = a.norm();
    if (n < 1e-12) return false;
    dirs.push_back(a / n);
    return true;
  };
  if (cfg.edgeNormals && v >= 2) {
    for (std::size_t k = 0; k < v; ++k) {
      const Eigen::Vector2d e = c[(k + 1) % v] - c[k];
      Eigen::Vector2d n(e.y(), -e.x());
      if (n.dot(0.5 * (c[k] + c[(k + 1) % v]) - center) < 0) n = -n;
      if (addDir(n)) edgeDirs[k] = dirs.back();
    }
  }
  if (cfg.centerDirections)
    for (std::size_t k = 0; k < v; ++k) addDir(c[k] - center);
  if (cfg.refine && v >= 2) {
    for (std::size_t k = 0; k < v && dirs.size() < 3 * v; ++k) {
      const Eigen::Vector2d a = edgeDirs[k];
      if (a.isZero()) continue;
      const Vec p = support_point(sets[k], a);
      const Vec q = support_point(sets[(k + 1) % v], a);
      Eigen::Vector2d n(q(1) - p(1), -(q(0) - p(0)));
      if (n.dot(a) < 0) n = -n;
      addDir(n);
    }
  }
  if (dirs.size() < 3) {
    for (Eigen::Vector2d a : {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0), Eigen::Vector2d(0, 1),
                              Eigen::Vector2d(0, -1)})
      dirs.push_back(a);
  }

  HPolytope2 P;
  P.A.resize(static_cast<Index>(dirs.size()), 2);
  P.b.resize(static_cast<Index>(dirs.size()));
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    P.A.row(static_cast<Index>(i)) = dirs[i].transpose();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : sets) best = std::max(best, support_upper(s, dirs[i]));
    P.b(static_cast<Index>(i)) = best;
  }
  return P;
}

// -- outer image -----------------------------------------------------------------

BinaryImage rasterize_outer(const HPolytope2& hull, const Eigen::Vector2d& lo,
                            const Eigen::Vector2d& hi, const CameraParams& cam, Execution exec,
                            ForwardStats* stats) {
  BinaryImage img(cam.width, cam.height);
  const PixelRange r = pixelRange(lo, hi, cam);
  if (r.empty()) return img;
  const int cols = r.qx1 - r.qx0 + 1;
  const int rows = r.qy1 - r.qy0 + 1;
  std::vector<unsigned char> hit(static_cast<std::size_t>(cols) * rows, 0);
  auto testRow = [&](int j) {
    const int qy = r.qy0 + j;
    for (int i = 0; i < cols; ++i) {
      const Pixel p{r.qx0 + i, qy};
      hit[static_cast<std::size_t>(j) * cols + i] =
          polytope_box_overlap_outer(hull, pixel_lo(p), pixel_hi(p)) ? 1 : 0;
    }
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < rows; ++j) testRow(j);
  } else {
    for (int j = 0; j < rows; ++j) testRow(j);
  }
  if (stats) stats->pixelTests += hit.size();
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i)
      if (hit[static_cast<std::size_t>(j) * cols + i]) img.set(r.qx0 + i, r.qy0 + j);
  return img;
}

PoseCandidateArtifacts forward_enclose(const Target& target, const UncertainPose& U,
                                       const CameraParams& cam, const HullConfig& cfg, Execution exec,
                                       ForwardStats* stats) {
  PoseCandidateArtifacts art;
  art.pose = U;
  const auto sets = enclose_vertices(target, U, cam);
  art.outerImage = BinaryImage(cam.width, cam.height);
  for (const auto& polySets : sets) {
    std::vector<VertexEnclosure> encl;
    encl.reserve(polySets.size());
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (const auto& s : polySets) {
      const Interval ih = interval_hull(s);
      lo = lo.cwiseMin(Eigen::Vector2d(ih.lo));
      hi = hi.cwiseMax(Eigen::Vector2d(ih.hi));
      encl.push_back(VertexEnclosure::fromSet(s, cam));
    }
    HPolytope2 hull = hull_enclose(polySets, cfg);
    BinaryImage img = rasterize_outer(hull, lo, hi, cam, exec, stats);
    art.outerImage |= img;
    art.polygonImages.push_back(std::move(img));
    art.hulls.push_back(std::move(hull));
    art.vertices.push_back(std::move(encl));
  }
  if (art.outerImage.empty())
    throw InvisibleCandidate(InvisibleCandidate::Reason::EmptyImage, "target is outside the image");
  art.errorRatio = error_ratio(art.vertices);
  return art;
}

PoseCandidateArtifacts conservative_artifacts(const UncertainPose& U, const Target& target,
                                              const CameraParams& cam) {
  PoseCandidateArtifacts art;
  art.pose = U;
  art.conservative = true;
  art.outerImage = BinaryImage::filled(cam.width, cam.height);
  art.polygonImages.assign(target.numPolygons(), art.outerImage);
  art.errorRatio = std::numeric_limits<double>::infinity();
  return art;
}

}  // namespace certipose
