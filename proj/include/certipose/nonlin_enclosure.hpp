#pragma once

// Sound linear enclosures of scalar functions over polynomial zonotopes.

#include "certipose/set_core.hpp"

#include <span>
#include <stdexcept>
#include <string>

namespace certipose {

enum class ScalarFunction { Sin, Cos, Reciprocal };

const char* to_string(ScalarFunction f);
double evaluate(ScalarFunction f, double x);

/// Raised when 1/x is requested on a domain touching or crossing zero. In the
/// camera pipeline this means a polygon may be at or behind the camera.
class DomainCrossesPole : public std::domain_error {
 public:
  explicit DomainCrossesPole(const std::string& what) : std::domain_error(what) {}
};

/// f(x) in [slope * x + intercept - errorRadius, slope * x + intercept + errorRadius]
/// for every x in [lo, hi].
struct LinearApproxEnclosure {
  double slope = 0.0;
  double intercept = 0.0;
  double errorRadius = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double approx(double x) const { return slope * x + intercept; }
};

/// Number of grid points used by the least-squares slope fit.
inline constexpr int kRegressionSamples = 1001;

/// Least-squares slope on a uniform grid; the intercept is then centred on the
/// band of approximation errors, whose extremes are found analytically at the
/// endpoints and at the stationary points of f(x) - slope * x.
LinearApproxEnclosure fit_linear(ScalarFunction f, double lo, double hi);

/// Applies f to every entry of p. The result is slope * p + intercept with one
/// independent generator of radius d per entry (omitted where d == 0).
PolyZonotope enclose_elementwise(ScalarFunction f, const PolyZonotope& p);
/// One function per entry.
PolyZonotope enclose_elementwise(std::span<const ScalarFunction> fs, const PolyZonotope& p);

}  // namespace certipose
