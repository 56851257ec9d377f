#include "certipose/preimage.hpp"

#include <cmath>

namespace certipose {

using Eigen::Index;

namespace {
constexpr double kEmptyTol = 1e-9;
}

ConstrainedPoseSet ConstrainedPoseSet::unconstrained(const UncertainPose& U) {
  ConstrainedPoseSet s;
  s.base = U;
  return s;
}

ConstrainedPoseSet ConstrainedPoseSet::sentinel(const UncertainPose& U) {
  ConstrainedPoseSet s;
  s.base = U;
  s.constraints.C = Mat::Zero(1, kPoseDim);
  s.constraints.d = Vec::Constant(1, -1.0);
  s.infeasible = true;
  return s;
}

LinearConstraints preimage_constraints(const VertexEnclosure& vertex, const HPolytope2& U) {
  LinearConstraints lc;
  const Mat A = U.A;
  lc.C = A * vertex.linGen;
  lc.d = U.b - A * vertex.linOffset;
  if (vertex.errGens.cols() > 0) lc.d += (A * vertex.errGens).cwiseAbs().rowwise().sum();
  return lc;
}

LinearConstraints stack(const std::vector<LinearConstraints>& blocks) {
  Index k = 0;
  for (const auto& b : blocks) {
    if (b.C.cols() != kPoseDim || b.C.rows() != b.d.size())
      throw DimensionMismatch("stack: constraint block has wrong shape");
    k += b.rows();
  }
  LinearConstraints out;
  out.C.resize(k, kPoseDim);
  out.d.resize(k);
  Index r = 0;
  for (const auto& b : blocks) {
    out.C.middleRows(r, b.rows()) = b.C;
    out.d.segment(r, b.rows()) = b.d;
    r += b.rows();
  }
  return out;
}

Vec latent_of(const UncertainPose& U, const Vec& pose) {
  if (pose.size() != kPoseDim) throw DimensionMismatch("pose must have 6 entries");
  const Vec c = U.center(), r = U.radius();
  Vec a(kPoseDim);
  for (Index i = 0; i < kPoseDim; ++i) a(i) = r(i) > 0 ? (pose(i) - c(i)) / r(i) : 0.0;
  return a;
}

bool contains(const ConstrainedPoseSet& S, const Vec& pose, double tol) {
  const Vec r = S.base.radius();
  for (Index i = 0; i < kPoseDim; ++i)
    if (r(i) == 0.0 && std::abs(pose(i) - S.base.center()(i)) > tol) return false;
  const Vec a = latent_of(S.base, pose);
  if ((a.array().abs() > 1.0 + tol).any()) return false;
  if (S.constraints.rows() == 0) return true;
  return ((S.C() * a - S.d()).array() <= tol).all();
}

std::optional<Interval> propagate_box(const LinearConstraints& lc, int maxSweeps) {
  Vec lo = -Vec::Ones(kPoseDim), hi = Vec::Ones(kPoseDim);
  const Index k = lc.rows();
  for (Index i = 0; i < k; ++i)
    if (lc.C.row(i).isZero(0.0) && lc.d(i) < -kEmptyTol) return std::nullopt;
  for (int sweep = 0; sweep < maxSweeps; ++sweep) {
    bool changed = false;
    for (Index i = 0; i < k; ++i) {
      double minSum = 0.0;
      for (Index j = 0; j < kPoseDim; ++j) {
        const double c = lc.C(i, j);
        minSum += c >= 0 ? c * lo(j) : c * hi(j);
      }
      if (minSum > lc.d(i) + kEmptyTol) return std::nullopt;
      for (Index j = 0; j < kPoseDim; ++j) {
        const double c = lc.C(i, j);
        if (c == 0.0) continue;
        const double rest = minSum - (c >= 0 ? c * lo(j) : c * hi(j));
        const double bound = (lc.d(i) - rest) / c;
        if (c > 0 && bound < hi(j)) {
          hi(j) = bound;
          changed = true;
        } else if (c < 0 && bound > lo(j)) {
          lo(j) = bound;
          changed = true;
        }
        if (lo(j) > hi(j) + kEmptyTol) return std::nullopt;
      }
    }
    if (!changed) break;
  }
  // clamp tolerance-sized inversions
  for (Index j = 0; j < kPoseDim; ++j)
    if (lo(j) > hi(j)) lo(j) = hi(j) = 0.5 * (lo(j) + hi(j));
  return Interval(lo, hi);
}

bool is_certainly_empty(const ConstrainedPoseSet& S) {
  if (S.infeasible) return true;
  return !propagate_box(S.constraints).has_value();
}

double box_volume(const Interval& box) {
  double v = 1.0;
  for (Index i = 0; i < box.dim(); ++i) v *= box.hi(i) - box.lo(i);
  return v;
}

VolumeEstimate volume_estimate(const ConstrainedPoseSet& S, std::size_t nSamples,
                               std::mt19937_64& rng) {
  if (nSamples == 0) throw std::invalid_argument("volume_estimate needs at least one sample");
  if (S.infeasible) return {};
  const double full = box_volume(S.base.box);
  if (S.constraints.rows() == 0) return {full, 0.0};
  const auto box = propagate_box(S.constraints);
  if (!box) return {};
  const double scale = full * box_volume(*box) / std::pow(2.0, kPoseDim);
  if (scale == 0.0) return {};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hits = 0;
  Vec a(kPoseDim);
  for (std::size_t s = 0; s < nSamples; ++s) {
    for (Index j = 0; j < kPoseDim; ++j) a(j) = box->lo(j) + (box->hi(j) - box->lo(j)) * u(rng);
    if (((S.C() * a - S.d()).array() <= 0.0).all()) ++hits;
  }
  const double f = static_cast<double>(hits) / static_cast<double>(nSamples);
  return {scale * f, scale * std::sqrt(f * (1.0 - f) / static_cast<double>(nSamples))};
}

}  // namespace certipose
