#pragma once

// Sparse (matrix) polynomial zonotopes.
//
// A polynomial zonotope is the set
//
//   { O + sum_i (prod_k alpha_k^E(k,i)) G_i + sum_j beta_j GI_j | alpha, beta in [-1,1] }
//
// Dependent factors alpha are identified by globally unique integer ids, so two
// sets that carry the same id share that factor. Independent factors beta are
// never shared: every operation treats them as fresh.

#include <Eigen/Dense>

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace certipose {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ExpMat = Eigen::MatrixXi;
using IdList = std::vector<int>;

class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

class MissingFactor : public std::invalid_argument {
 public:
  explicit MissingFactor(const std::string& what) : std::invalid_argument(what) {}
};

// Structural equality tolerance on coefficients.
inline constexpr double kStructTol = 1e-12;
// Slack used by membership / containment checks.
inline constexpr double kMemberTol = 1e-9;

struct Interval {
  Vec lo;
  Vec hi;

  Interval() = default;
  Interval(Vec lo, Vec hi);

  static Interval point(const Vec& x) { return Interval(x, x); }

  Eigen::Index dim() const { return lo.size(); }
  Vec center() const { return 0.5 * (lo + hi); }
  Vec radius() const { return 0.5 * (hi - lo); }
  bool contains(const Vec& x, double tol = 0.0) const;
};

/// Hands out fresh dependent-factor ids. Owned by whoever builds a pipeline.
class FactorIdAllocator {
 public:
  explicit FactorIdAllocator(int first = 1) : next_(first) {}
  IdList take(int count);

 private:
  int next_;
};

/// Values for the factors of a set. Only used to evaluate members (oracles).
struct FactorAssignment {
  std::map<int, double> alpha;  // keyed by factor id
  Vec beta;                     // empty means all zero

  double alphaFor(int id) const;
};

class PolyZonotope {
 public:
  PolyZonotope() = default;
  PolyZonotope(Vec offset, Mat dep, Mat indep, ExpMat exponents, IdList ids);

  static PolyZonotope point(const Vec& c);

  Eigen::Index dim() const { return offset_.size(); }
  Eigen::Index numDep() const { return dep_.cols(); }
  Eigen::Index numIndep() const { return indep_.cols(); }

  const Vec& offset() const { return offset_; }
  const Mat& dep() const { return dep_; }
  const Mat& indep() const { return indep_; }
  const ExpMat& exponents() const { return exponents_; }
  const IdList& ids() const { return ids_; }

 private:
  Vec offset_;
  Mat dep_;
  Mat indep_;
  ExpMat exponents_;
  IdList ids_;
};

/// Matrix-valued polynomial zonotope. Generators are stored column-major
/// vectorised: column i of dep() is vec(G_i) with G_i of size rows x cols.
class MatPolyZonotope {
 public:
  MatPolyZonotope() = default;
  MatPolyZonotope(Mat offset, Mat dep, Mat indep, ExpMat exponents, IdList ids);

  static MatPolyZonotope constant(const Mat& m);
  static MatPolyZonotope fromVector(const PolyZonotope& p);

  Eigen::Index rows() const { return offset_.rows(); }
  Eigen::Index cols() const { return offset_.cols(); }
  Eigen::Index numDep() const { return dep_.cols(); }
  Eigen::Index numIndep() const { return indep_.cols(); }

  const Mat& offset() const { return offset_; }
  const Mat& dep() const { return dep_; }
  const Mat& indep() const { return indep_; }
  const ExpMat& exponents() const { return exponents_; }
  const IdList& ids() const { return ids_; }

  Mat depGen(Eigen::Index i) const;
  Mat indepGen(Eigen::Index j) const;

  /// Column k as a vector polynomial zonotope (uncertainty of the k-th column).
  PolyZonotope column(Eigen::Index k) const;
  /// Requires cols() == 1.
  PolyZonotope toVector() const;

 private:
  Mat offset_;
  Mat dep_;
  Mat indep_;
  ExpMat exponents_;
  IdList ids_;
};

// -- construction ----------------------------------------------------------

PolyZonotope make_box(const Interval& iv, const IdList& ids);

// -- exact operations ------------------------------------------------------

/// Sum of two sets. Factors with equal ids are identified; with disjoint ids
/// this is the Minkowski sum.
PolyZonotope mink_sum(const PolyZonotope& a, const PolyZonotope& b);
MatPolyZonotope mink_sum(const MatPolyZonotope& a, const MatPolyZonotope& b);

PolyZonotope translate(const PolyZonotope& p, const Vec& shift);

/// Set-valued matrix product. Dependent x dependent terms are exact; every
/// cross term involving an independent generator is bounded entrywise and
/// re-homed as fresh independent generators. The result is compacted.
MatPolyZonotope mat_mul(const MatPolyZonotope& a, const MatPolyZonotope& b);

/// Affine special cases.
PolyZonotope linear_map(const Mat& m, const PolyZonotope& p);
MatPolyZonotope linear_map(const Mat& m, const MatPolyZonotope& p);
MatPolyZonotope right_multiply(const MatPolyZonotope& p, const Mat& m);

/// s * pattern for a scalar (1-d) set s.
MatPolyZonotope scalar_times(const PolyZonotope& s, const Mat& pattern);

/// Tile a vector set into an n x count matrix set with every column equal.
MatPolyZonotope repeat_columns(const PolyZonotope& p, Eigen::Index count);

/// Stack vector sets vertically (ids merged, result compacted).
PolyZonotope stack(const std::vector<PolyZonotope>& parts);

// -- indexing --------------------------------------------------------------

PolyZonotope index(const PolyZonotope& p, std::span<const Eigen::Index> rows);
PolyZonotope index(const PolyZonotope& p, Eigen::Index row);
MatPolyZonotope index(const MatPolyZonotope& p, std::span<const Eigen::Index> rows,
                      std::span<const Eigen::Index> cols);
/// Single entry (i, j) as a scalar set.
PolyZonotope index(const MatPolyZonotope& p, Eigen::Index row, Eigen::Index col);

// -- canonical form --------------------------------------------------------

/// Merges dependent columns with equal exponents, folds constant columns into
/// the offset and drops zero generators. Represents the same set.
PolyZonotope compact(const PolyZonotope& p);
MatPolyZonotope compact(const MatPolyZonotope& p);

// -- evaluation and bounds -------------------------------------------------

Vec sample(const PolyZonotope& p, const FactorAssignment& fa);
Mat sample(const MatPolyZonotope& p, const FactorAssignment& fa);

/// Monomial values prod_k alpha_k^E(k,i) for every dependent column.
Vec monomials(const ExpMat& exponents, const IdList& ids, const FactorAssignment& fa);

Interval interval_hull(const PolyZonotope& p);
double support_upper(const PolyZonotope& p, const Vec& dir);
/// offset + sum sign(dir' g) g over all generators: the point realising the
/// zonotope relaxation of the support function.
Vec support_point(const PolyZonotope& p, const Vec& dir);

struct LinearErrorSplit {
  PolyZonotope linear;
  PolyZonotope error;
};

/// Splits p into the part linear in the given input factors and the rest.
LinearErrorSplit split_linear_error(const PolyZonotope& p, const IdList& inputIds);

bool structurally_equal(const PolyZonotope& a, const PolyZonotope& b, double tol = kStructTol);

nlohmann::json to_json(const PolyZonotope& p);
PolyZonotope poly_zonotope_from_json(const nlohmann::json& j);

}  // namespace certipose
