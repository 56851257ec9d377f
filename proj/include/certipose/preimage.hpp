#pragma once

// Linear constraints on the latent hypercube of a pose box, derived from
// output-space polytopes containing the projected vertices.

#include <optional>
#include <random>
#include <vector>

#include "certipose/geometry.hpp"
#include "certipose/pose_forward.hpp"

namespace certipose {

struct LinearConstraints {
  Mat C = Mat(0, kPoseDim);  // k x 6
  Vec d = Vec(0);

  Eigen::Index rows() const { return C.rows(); }
};

/// { o + G alpha | alpha in [-1, 1]^6, C alpha <= d }.
struct ConstrainedPoseSet {
  UncertainPose base;
  LinearConstraints constraints;
  bool infeasible = false;

  static ConstrainedPoseSet unconstrained(const UncertainPose& U);
  /// C = 0, d = -1.
  static ConstrainedPoseSet sentinel(const UncertainPose& U);

  const Mat& C() const { return constraints.C; }
  const Vec& d() const { return constraints.d; }
};

/// C = A G~, d = b - A o~ + |A G^| 1 for a vertex enclosure and a polytope
/// A x <= b that contains the vertex.
LinearConstraints preimage_constraints(const VertexEnclosure& vertex, const HPolytope2& U);

LinearConstraints stack(const std::vector<LinearConstraints>& blocks);

/// Latent coordinates of a pose; dimensions with zero radius map to 0.
Vec latent_of(const UncertainPose& U, const Vec& pose);

bool contains(const ConstrainedPoseSet& S, const Vec& pose, double tol = kMemberTol);

/// Interval constraint propagation over alpha in [-1, 1]^6. Returns the
/// tightened box, or nothing when the constraints are proven infeasible.
std::optional<Interval> propagate_box(const LinearConstraints& lc, int maxSweeps = 50);

bool is_certainly_empty(const ConstrainedPoseSet& S);

double box_volume(const Interval& box);

struct VolumeEstimate {
  double volume = 0.0;
  double stderror = 0.0;
};

/// Monte Carlo volume in pose units; samples inside the propagated box.
VolumeEstimate volume_estimate(const ConstrainedPoseSet& S, std::size_t nSamples,
                               std::mt19937_64& rng);

}  // namespace certipose
