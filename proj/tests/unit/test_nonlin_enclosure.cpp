#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "certipose/nonlin_enclosure.hpp"
#include "../support/random_sets.hpp"

using namespace certipose;
using namespace certipose::testing;

namespace {
constexpr double kPi = std::numbers::pi;

double maxGridError(const LinearApproxEnclosure& e, ScalarFunction f, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = e.lo + (e.hi - e.lo) * i / (n - 1);
    worst = std::max(worst, std::abs(evaluate(f, x) - e.approx(x)));
  }
  return worst;
}

PolyZonotope angleBox() {
  Vec lo(1), hi(1);
  lo << kPi / 6;
  hi << kPi / 2;
  return make_box(Interval(lo, hi), {1});
}
}  // namespace

TEST(FitLinear, SineOnReferenceDomain) {
  const auto e = fit_linear(ScalarFunction::Sin, kPi / 6, kPi / 2);
  EXPECT_NEAR(e.slope, 0.4851, 0.02);
  EXPECT_NEAR(e.intercept, 0.2981, 0.02);
  EXPECT_NEAR(e.errorRadius, 0.0602, 0.02);
  EXPECT_LE(maxGridError(e, ScalarFunction::Sin, 100001), e.errorRadius);
}

TEST(FitLinear, CosineOnReferenceDomain) {
  const auto e = fit_linear(ScalarFunction::Cos, kPi / 6, kPi / 2);
  EXPECT_NEAR(e.slope, -0.8402, 0.02);
  EXPECT_NEAR(e.intercept, 1.3432, 0.02);
  EXPECT_NEAR(e.errorRadius, 0.0374, 0.02);
  EXPECT_LE(maxGridError(e, ScalarFunction::Cos, 100001), e.errorRadius);
}

TEST(FitLinear, DegenerateDomain) {
  for (auto f : {ScalarFunction::Sin, ScalarFunction::Cos, ScalarFunction::Reciprocal}) {
    const auto e = fit_linear(f, 0.7, 0.7);
    EXPECT_TRUE(std::isfinite(e.slope));
    EXPECT_DOUBLE_EQ(e.approx(0.7), evaluate(f, 0.7));
    EXPECT_EQ(e.errorRadius, 0.0);
  }
}

TEST(FitLinear, ReciprocalPole) {
  EXPECT_THROW(fit_linear(ScalarFunction::Reciprocal, -1.0, 2.0), DomainCrossesPole);
  EXPECT_THROW(fit_linear(ScalarFunction::Reciprocal, 0.0, 2.0), DomainCrossesPole);
  EXPECT_NO_THROW(fit_linear(ScalarFunction::Reciprocal, 0.1, 2.0));
}

TEST(FitLinear, RandomDomainsAreSound) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const double lo = uniform(rng, -8, 8);
    const double hi = lo + uniform(rng, 0, 7);
    for (auto f : {ScalarFunction::Sin, ScalarFunction::Cos}) {
      const auto e = fit_linear(f, lo, hi);
      ASSERT_LE(maxGridError(e, f, 20001), e.errorRadius) << lo << " " << hi;
    }
    const double rlo = uniform(rng, 0.05, 10);
    const auto r = fit_linear(ScalarFunction::Reciprocal, rlo, rlo + uniform(rng, 0, 10));
    ASSERT_LE(maxGridError(r, ScalarFunction::Reciprocal, 20001), r.errorRadius);
  }
}

TEST(EncloseElementwise, JointSineCosine) {
  const PolyZonotope x = angleBox();
  const PolyZonotope stacked = stack({x, x});
  const ScalarFunction fs[] = {ScalarFunction::Sin, ScalarFunction::Cos};
  const PolyZonotope y = enclose_elementwise(fs, stacked);
  ASSERT_EQ(y.dim(), 2);
  EXPECT_NEAR(y.offset()(0), 0.8061, 0.02);
  EXPECT_NEAR(y.offset()(1), 0.4634, 0.02);
  ASSERT_EQ(y.numDep(), 1);
  EXPECT_NEAR(y.dep()(0, 0), 0.2540, 0.02);
  EXPECT_NEAR(y.dep()(1, 0), -0.4399, 0.02);
  ASSERT_EQ(y.numIndep(), 2);
  EXPECT_NEAR(y.indep()(0, 0), 0.0602, 0.02);
  EXPECT_NEAR(y.indep()(1, 1), 0.0374, 0.02);
  EXPECT_EQ(y.indep()(1, 0), 0.0);
  EXPECT_EQ(y.indep()(0, 1), 0.0);
  EXPECT_EQ(y.ids(), IdList{1});
  EXPECT_EQ(y.exponents()(0, 0), 1);
}

TEST(EncloseElementwise, DependencyPreserved) {
  const PolyZonotope x = angleBox();
  const auto e = fit_linear(ScalarFunction::Sin, kPi / 6, kPi / 2);
  const PolyZonotope y = enclose_elementwise(ScalarFunction::Sin, x);
  EXPECT_NEAR(y.dep()(0, 0), e.slope * x.dep()(0, 0), 1e-15);
}

TEST(EncloseElementwise, LinearPartWithinErrorRadius) {
  const PolyZonotope x = angleBox();
  const PolyZonotope y = enclose_elementwise(ScalarFunction::Sin, x);
  const double d = y.indep()(0, 0);
  std::mt19937_64 rng(22);
  for (int k = 0; k < 100; ++k) {
    FactorAssignment fa;
    fa.alpha[1] = uniform(rng, -1, 1);
    const double angle = sample(x, fa)(0);
    fa.beta = Vec::Zero(1);
    EXPECT_LE(std::abs(sample(y, fa)(0) - std::sin(angle)), d);
  }
}

TEST(EncloseElementwise, ReciprocalOfSingleton) {
  Vec two(1);
  two << 2.0;
  const PolyZonotope y = enclose_elementwise(ScalarFunction::Reciprocal, PolyZonotope::point(two));
  EXPECT_DOUBLE_EQ(y.offset()(0), 0.5);
  EXPECT_EQ(y.numIndep(), 0);
  const Interval ih = interval_hull(y);
  EXPECT_DOUBLE_EQ(ih.lo(0), 0.5);
  EXPECT_DOUBLE_EQ(ih.hi(0), 0.5);
}

TEST(EncloseElementwise, PointwiseSoundness) {
  std::mt19937_64 rng(23);
  const IdList pool{1, 2, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const PolyZonotope p = randomPZ(rng, 1, pool, 4, 1, 2);
    for (auto f : {ScalarFunction::Sin, ScalarFunction::Cos}) {
      const PolyZonotope y = enclose_elementwise(f, p);
      for (int k = 0; k < 500; ++k) {
        FactorAssignment fa = randomFactors(rng, pool, p.numIndep());
        const double x = sample(p, fa)(0);
        ASSERT_TRUE(memberGivenAlpha(y, fa, Vec::Constant(1, evaluate(f, x)), rng)) << to_string(f);
      }
    }
  }
}

TEST(EncloseElementwise, PoleSignalled) {
  const PolyZonotope x = make_box(Interval(Vec::Constant(1, -0.5), Vec::Constant(1, 1.0)), {1});
  EXPECT_THROW(enclose_elementwise(ScalarFunction::Reciprocal, x), DomainCrossesPole);
}
