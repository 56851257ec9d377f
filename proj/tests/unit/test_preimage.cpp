#include <gtest/gtest.h>

#include <random>

#include "certipose/preimage.hpp"
#include "../support/random_sets.hpp"

using namespace certipose;
using namespace certipose::testing;

namespace {
const CameraParams kCam{125, 100, 100};

UncertainPose unitPose() { return UncertainPose(Interval(-Vec::Ones(6), Vec::Ones(6))); }

UncertainPose randomPoseBox(std::mt19937_64& rng) {
  Vec c(6), r(6);
  c << uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2), uniform(rng, 4, 6), uniform(rng, 0, 0.5),
      uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1);
  r << uniform(rng, 0.01, 0.2), uniform(rng, 0.01, 0.2), uniform(rng, 0.05, 0.4),
      uniform(rng, 0.01, 0.15), uniform(rng, 0.01, 0.06), uniform(rng, 0.01, 0.06);
  return UncertainPose(Interval(c - r, c + r));
}

/// A random polygon around a point: hull of a few points within `spread`.
HPolytope2 randomPolytopeNear(std::mt19937_64& rng, const Eigen::Vector2d& c, double spread) {
  Eigen::Matrix2Xd pts(2, 6);
  for (int k = 0; k < 6; ++k)
    pts.col(k) = c + Eigen::Vector2d(uniform(rng, -spread, spread), uniform(rng, -spread, spread));
  return convex_hull_points(pts);
}

template <class Fn>
void forEachGridPoint(int n, Fn&& fn) {
  Vec a(6);
  std::vector<int> idx(6, 0);
  for (;;) {
    for (int j = 0; j < 6; ++j) a(j) = -1.0 + 2.0 * idx[static_cast<std::size_t>(j)] / (n - 1);
    fn(a);
    int j = 0;
    while (j < 6 && ++idx[static_cast<std::size_t>(j)] == n) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == 6) return;
  }
}

FactorAssignment poseFactors(const Vec& a) {
  FactorAssignment fa;
  for (int j = 0; j < 6; ++j) fa.alpha[kPoseIds[static_cast<std::size_t>(j)]] = a(j);
  return fa;
}
}  // namespace

TEST(PreimageConstraints, PureBoxHasNoErrorTerm) {
  Vec lo(2), hi(2);
  lo << 10, 20;
  hi << 14, 22;
  const PolyZonotope box = make_box(Interval(lo, hi), {1, 2});
  const VertexEnclosure v = VertexEnclosure::fromSet(box, kCam);
  const HPolytope2 U = convex_hull_points((Eigen::Matrix2Xd(2, 3) << 11, 13, 12, 20, 20, 21.5).finished());
  const LinearConstraints lc = preimage_constraints(v, U);
  EXPECT_TRUE(lc.C.isApprox(U.A * v.linGen));
  EXPECT_TRUE(lc.d.isApprox(U.b - U.A * v.linOffset));
}

TEST(PreimageConstraints, ZeroLinearPart) {
  Vec off(2);
  off << 5, 5;
  const PolyZonotope p(off, Mat(2, 0), Mat::Identity(2, 2), ExpMat(0, 0), {});
  const VertexEnclosure v = VertexEnclosure::fromSet(p, kCam);
  const HPolytope2 U = convex_hull_points((Eigen::Matrix2Xd(2, 2) << 0, 1, 0, 1).finished());
  const LinearConstraints lc = preimage_constraints(v, U);
  EXPECT_TRUE(lc.C.isZero());
  const Vec expected = U.b - U.A * v.linOffset + (U.A * v.errGens).cwiseAbs().rowwise().sum();
  EXPECT_TRUE(lc.d.isApprox(expected));
}

TEST(PreimageConstraints, GridOracleSyntheticSets) {
  std::mt19937_64 rng(1);
  std::size_t inside = 0;
  for (int trial = 0; trial < 40; ++trial) {
    PolyZonotope p = randomPZ(rng, 2, kPoseIds, 8, 3, 2);
    p = translate(p, Vec::Constant(2, 50.0));
    const VertexEnclosure v = VertexEnclosure::fromSet(p, kCam);
    const HPolytope2 U = randomPolytopeNear(rng, p.offset(), 2.0);
    const LinearConstraints lc = preimage_constraints(v, U);
    forEachGridPoint(5, [&](const Vec& a) {
      FactorAssignment fa = poseFactors(a);
      fa.beta = randomMat(rng, p.numIndep(), 1);
      if (!U.contains(sample(p, fa), 0.0)) return;
      ++inside;
      ASSERT_TRUE(((lc.C * a - lc.d).array() <= 1e-9).all());
    });
  }
  EXPECT_GT(inside, 100u);
}

TEST(PreimageConstraints, GridOracleProjectedVertices) {
  std::mt19937_64 rng(2);
  const Target t = builtin_target("letter");
  std::size_t inside = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const UncertainPose U = randomPoseBox(rng);
    const PoseCandidateArtifacts art = forward_enclose(t, U, kCam);
    const auto& v = art.vertices[0][static_cast<std::size_t>(trial % 4)];
    const HPolytope2 P = randomPolytopeNear(rng, v.linOffset, 3.0);
    const LinearConstraints lc = preimage_constraints(v, P);
    const Eigen::Matrix3Xd vert = t.polygons()[0].vertices().col(trial % 4);
    forEachGridPoint(7, [&](const Vec& a) {
      const Vec pose = U.center() + U.radius().cwiseProduct(a);
      const Eigen::Vector2d px = project(kCam, Pose::fromVector(pose), vert).pcf.col(0);
      if (!P.contains(px, 0.0)) return;
      ++inside;
      ASSERT_TRUE(((lc.C * a - lc.d).array() <= 1e-9).all());
    });
  }
  EXPECT_GT(inside, 100u);
}

TEST(Stack, Shapes) {
  EXPECT_EQ(stack(std::vector<LinearConstraints>{}).rows(), 0);
  LinearConstraints a;
  a.C = Mat::Ones(2, 6);
  a.d = Vec::Ones(2);
  const LinearConstraints one = stack({a});
  EXPECT_EQ(one.C, a.C);
  const LinearConstraints two = stack({a, a});
  EXPECT_EQ(two.rows(), 4);
  LinearConstraints bad;
  bad.C = Mat::Ones(1, 5);
  bad.d = Vec::Ones(1);
  EXPECT_THROW(stack({bad}), DimensionMismatch);
}

TEST(Contains, Basics) {
  ConstrainedPoseSet s = ConstrainedPoseSet::unconstrained(unitPose());
  s.constraints.C = Mat::Identity(6, 6);
  s.constraints.d = Vec::Zero(6);
  EXPECT_TRUE(contains(s, Vec::Zero(6)));
  EXPECT_FALSE(contains(s, Vec::Constant(6, 0.5)));
  EXPECT_FALSE(contains(ConstrainedPoseSet::unconstrained(unitPose()), Vec::Constant(6, 1.5)));
  EXPECT_FALSE(contains(ConstrainedPoseSet::sentinel(unitPose()), Vec::Zero(6)));
}

TEST(Contains, MatchesDefinitionAndIsMonotone) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const UncertainPose U = randomPoseBox(rng);
    ConstrainedPoseSet s = ConstrainedPoseSet::unconstrained(U);
    s.constraints.C = randomMat(rng, 4, 6);
    s.constraints.d = randomMat(rng, 4, 1, 0.5);
    ConstrainedPoseSet fewer = s;
    fewer.constraints.C = s.C().topRows(2);
    fewer.constraints.d = s.d().head(2);
    for (int k = 0; k < 50; ++k) {
      Vec a(6);
      for (int j = 0; j < 6; ++j) a(j) = uniform(rng, -1.2, 1.2);
      const Vec pose = U.center() + U.radius().cwiseProduct(a);
      const bool direct =
          (a.array().abs() <= 1.0).all() && ((s.C() * a - s.d()).array() <= 0.0).all();
      const bool got = contains(s, pose);
      if (direct) EXPECT_TRUE(got);
      if (got) EXPECT_TRUE(contains(fewer, pose));
    }
  }
}

TEST(Emptiness, Basics) {
  EXPECT_TRUE(is_certainly_empty(ConstrainedPoseSet::sentinel(unitPose())));
  EXPECT_FALSE(is_certainly_empty(ConstrainedPoseSet::unconstrained(unitPose())));
  ConstrainedPoseSet s = ConstrainedPoseSet::unconstrained(unitPose());
  s.constraints.C = Mat::Zero(2, 6);
  s.constraints.C(0, 0) = 1;
  s.constraints.C(1, 0) = -1;
  s.constraints.d = Vec::Constant(2, -0.5);  // a0 <= -0.5 and a0 >= 0.5
  EXPECT_TRUE(is_certainly_empty(s));
}

TEST(Emptiness, FeasibleNeverReportedEmpty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    ConstrainedPoseSet s = ConstrainedPoseSet::unconstrained(unitPose());
    const int k = uniformInt(rng, 1, 30);
    s.constraints.C = randomMat(rng, k, 6);
    Vec a0(6);
    for (int j = 0; j < 6; ++j) a0(j) = uniform(rng, -1, 1);
    s.constraints.d = s.C() * a0 + randomMat(rng, k, 1, 0.05).cwiseAbs();
    ASSERT_FALSE(is_certainly_empty(s));
    const auto box = propagate_box(s.constraints);
    ASSERT_TRUE(box.has_value());
    ASSERT_TRUE(box->contains(a0, 1e-9));
  }
}

TEST(Emptiness, EmptyClaimsAreProofs) {
  std::mt19937_64 rng(5);
  int claims = 0;
  for (int trial = 0; trial < 3000 && claims < 30; ++trial) {
    ConstrainedPoseSet s = ConstrainedPoseSet::unconstrained(unitPose());
    s.constraints.C = randomMat(rng, 6, 6);
    s.constraints.d = randomMat(rng, 6, 1, 1.0) - Vec::Constant(6, 1.2);
    if (!is_certainly_empty(s)) continue;
    ++claims;
    forEachGridPoint(5, [&](const Vec& a) {
      ASSERT_FALSE(((s.C() * a - s.d()).array() <= 0.0).all());
    });
  }
  EXPECT_GT(claims, 0);
}

TEST(Volume, Basics) {
  std::mt19937_64 rng(6);
  const UncertainPose U = randomPoseBox(rng);
  const VolumeEstimate full = volume_estimate(ConstrainedPoseSet::unconstrained(U), 100, rng);
  EXPECT_DOUBLE_EQ(full.volume, box_volume(U.box));
  EXPECT_EQ(full.stderror, 0.0);
  EXPECT_EQ(volume_estimate(ConstrainedPoseSet::sentinel(U), 100, rng).volume, 0.0);
  EXPECT_THROW(volume_estimate(ConstrainedPoseSet::unconstrained(U), 0, rng), std::invalid_argument);
}

TEST(Volume, HalfSpaces) {
  std::mt19937_64 rng(7);
  const UncertainPose U = randomPoseBox(rng);
  const double full = box_volume(U.box);
  ConstrainedPoseSet s = ConstrainedPoseSet::unconstrained(U);
  s.constraints.C = Mat::Zero(1, 6);
  s.constraints.C(0, 0) = 1;
  s.constraints.d = Vec::Zero(1);
  VolumeEstimate v = volume_estimate(s, 20000, rng);
  EXPECT_LE(std::abs(v.volume - full / 2), 3 * v.stderror + 1e-12 * full);
  s.constraints.C(0, 1) = 1;  // a0 + a1 <= 0
  v = volume_estimate(s, 20000, rng);
  EXPECT_GT(v.stderror, 0.0);
  EXPECT_LE(std::abs(v.volume - full / 2), 3 * v.stderror);
}
