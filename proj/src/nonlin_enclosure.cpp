#include "certipose/nonlin_enclosure.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace certipose {

const char* to_string(ScalarFunction f) {
  switch (f) {
    case ScalarFunction::Sin: return "sin";
    case ScalarFunction::Cos: return "cos";
    case ScalarFunction::Reciprocal: return "recip";
  }
  return "?";
}

double evaluate(ScalarFunction f, double x) {
  switch (f) {
    case ScalarFunction::Sin: return std::sin(x);
    case ScalarFunction::Cos: return std::cos(x);
    case ScalarFunction::Reciprocal: return 1.0 / x;
  }
  return 0.0;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInflation = 1e-12;

// Adds base + 2*pi*k for every k placing it inside [lo, hi].
void addPeriodic(double base, double lo, double hi, std::vector<double>& out) {
  const double kMin = std::ceil((lo - base) / kTwoPi);
  const double kMax = std::floor((hi - base) / kTwoPi);
  for (double k = kMin; k <= kMax; k += 1.0) out.push_back(base + k * kTwoPi);
}

// Interior points where f'(x) == slope.
std::vector<double> stationaryPoints(ScalarFunction f, double slope, double lo, double hi) {
  std::vector<double> pts;
  switch (f) {
    case ScalarFunction::Sin:  // cos x = slope
      if (std::abs(slope) <= 1.0) {
        const double x0 = std::acos(slope);
        addPeriodic(x0, lo, hi, pts);
        addPeriodic(-x0, lo, hi, pts);
      }
      break;
    case ScalarFunction::Cos:  // -sin x = slope
      if (std::abs(slope) <= 1.0) {
        const double x0 = std::asin(-slope);
        addPeriodic(x0, lo, hi, pts);
        addPeriodic(std::numbers::pi - x0, lo, hi, pts);
      }
      break;
    case ScalarFunction::Reciprocal:  // -1/x^2 = slope
      if (slope < 0.0) {
        const double x0 = std::sqrt(-1.0 / slope);
        if (x0 >= lo && x0 <= hi) pts.push_back(x0);
      }
      break;
  }
  return pts;
}

}  // namespace

LinearApproxEnclosure fit_linear(ScalarFunction f, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("fit_linear: empty domain");
  if (f == ScalarFunction::Reciprocal && lo <= 0.0)
    throw DomainCrossesPole("reciprocal domain [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] reaches zero");
  LinearApproxEnclosure enc;
  enc.lo = lo;
  enc.hi = hi;
  if (lo == hi) {
    enc.intercept = evaluate(f, lo);
    return enc;
  }

  double mx = 0.0, my = 0.0;
  std::vector<double> xs(kRegressionSamples), ys(kRegressionSamples);
  for (int i = 0; i < kRegressionSamples; ++i) {
    xs[i] = lo + (hi - lo) * i / (kRegressionSamples - 1);
    ys[i] = evaluate(f, xs[i]);
    mx += xs[i];
    my += ys[i];
  }
  mx /= kRegressionSamples;
  my /= kRegressionSamples;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < kRegressionSamples; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  enc.slope = sxy / sxx;

  // e(x) = f(x) - slope * x attains its extremes at endpoints or stationary points.
  std::vector<double> cands = stationaryPoints(f, enc.slope, lo, hi);
  cands.push_back(lo);
  cands.push_back(hi);
  double eMin = INFINITY, eMax = -INFINITY;
  for (double x : cands) {
    const double e = evaluate(f, x) - enc.slope * x;
    eMin = std::min(eMin, e);
    eMax = std::max(eMax, e);
  }
  enc.intercept = 0.5 * (eMax + eMin);
  enc.errorRadius = 0.5 * (eMax - eMin) + kInflation;
  return enc;
}

PolyZonotope enclose_elementwise(ScalarFunction f, const PolyZonotope& p) {
  std::vector<ScalarFunction> fs(static_cast<size_t>(p.dim()), f);
  return enclose_elementwise(fs, p);
}

PolyZonotope enclose_elementwise(std::span<const ScalarFunction> fs, const PolyZonotope& p) {
  if (static_cast<Eigen::Index>(fs.size()) != p.dim())
    throw DimensionMismatch("enclose_elementwise: need one function per entry");
  const Interval dom = interval_hull(p);
  const Eigen::Index n = p.dim();
  Vec slope(n), intercept(n), radius(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LinearApproxEnclosure enc = fit_linear(fs[i], dom.lo(i), dom.hi(i));
    slope(i) = enc.slope;
    intercept(i) = enc.intercept;
    radius(i) = enc.errorRadius;
  }
  Eigen::Index extra = (radius.array() > 0.0).count();
  Mat indep(n, p.numIndep() + extra);
  indep.leftCols(p.numIndep()) = slope.asDiagonal() * p.indep();
  indep.rightCols(extra).setZero();
  Eigen::Index col = p.numIndep();
  for (Eigen::Index i = 0; i < n; ++i)
    if (radius(i) > 0.0) indep(i, col++) = radius(i);
  return PolyZonotope(slope.cwiseProduct(p.offset()) + intercept, slope.asDiagonal() * p.dep(),
                      indep, p.exponents(), p.ids());
}

}  // namespace certipose
