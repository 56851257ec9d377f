#include "certipose/set_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace certipose {

using Eigen::Index;

namespace {

void checkIds(const IdList& ids) {
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] <= 0) throw std::invalid_argument("factor ids must be positive");
    if (i > 0 && ids[i] <= ids[i - 1])
      throw std::invalid_argument("factor ids must be strictly increasing");
  }
}

void checkExponents(const ExpMat& e, Index cols, const IdList& ids) {
  if (e.cols() != cols || e.rows() != static_cast<Index>(ids.size()))
    throw DimensionMismatch("exponent matrix does not match generators / ids");
  if (e.size() > 0 && e.minCoeff() < 0) throw std::invalid_argument("negative exponent");
}

// Union of two id lists plus, for each input, the merged row of each of its ids.
struct IdMerge {
  IdList ids;
  std::vector<Index> rowsA;
  std::vector<Index> rowsB;
};

IdMerge mergeIds(const IdList& a, const IdList& b) {
  IdMerge m;
  m.ids.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m.ids));
  auto rowsOf = [&](const IdList& src) {
    std::vector<Index> rows(src.size());
    for (size_t i = 0; i < src.size(); ++i)
      rows[i] = std::lower_bound(m.ids.begin(), m.ids.end(), src[i]) - m.ids.begin();
    return rows;
  };
  m.rowsA = rowsOf(a);
  m.rowsB = rowsOf(b);
  return m;
}

ExpMat expandRows(const ExpMat& e, const std::vector<Index>& rows, Index total) {
  ExpMat out = ExpMat::Zero(total, e.cols());
  for (Index r = 0; r < e.rows(); ++r) out.row(rows[r]) = e.row(r);
  return out;
}

template <typename Derived>
Mat hcat(const Eigen::MatrixBase<Derived>& a, const Mat& b) {
  Mat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

ExpMat hcatExp(const ExpMat& a, const ExpMat& b) {
  ExpMat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

// Generic compaction on vectorised generators.
struct Compacted {
  Vec offset;
  Mat dep;
  Mat indep;
  ExpMat exponents;
};

Compacted compactParts(const Vec& offset, const Mat& dep, const Mat& indep,
                       const ExpMat& exponents) {
  Compacted c;
  c.offset = offset;
  const Index dim = offset.size();
  std::map<std::vector<int>, Index> slot;
  std::vector<Vec> gens;
  std::vector<std::vector<int>> exps;
  for (Index i = 0; i < dep.cols(); ++i) {
    std::vector<int> key(exponents.rows());
    bool constant = true;
    for (Index r = 0; r < exponents.rows(); ++r) {
      key[r] = exponents(r, i);
      constant = constant && key[r] == 0;
    }
    if (constant) {
      c.offset += dep.col(i);
      continue;
    }
    auto [it, inserted] = slot.try_emplace(key, static_cast<Index>(gens.size()));
    if (inserted) {
      gens.emplace_back(dep.col(i));
      exps.push_back(std::move(key));
    } else {
      gens[it->second] += dep.col(i);
    }
  }
  std::vector<Index> keep;
  for (Index i = 0; i < static_cast<Index>(gens.size()); ++i)
    if (gens[i].cwiseAbs().maxCoeff() > 0.0) keep.push_back(i);
  c.dep.resize(dim, static_cast<Index>(keep.size()));
  c.exponents.resize(exponents.rows(), static_cast<Index>(keep.size()));
  for (Index j = 0; j < static_cast<Index>(keep.size()); ++j) {
    c.dep.col(j) = gens[keep[j]];
    for (Index r = 0; r < exponents.rows(); ++r) c.exponents(r, j) = exps[keep[j]][r];
  }
  std::vector<Index> keepI;
  for (Index j = 0; j < indep.cols(); ++j)
    if (indep.col(j).cwiseAbs().maxCoeff() > 0.0) keepI.push_back(j);
  c.indep.resize(dim, static_cast<Index>(keepI.size()));
  for (Index j = 0; j < static_cast<Index>(keepI.size()); ++j) c.indep.col(j) = indep.col(keepI[j]);
  return c;
}

Mat vecOf(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

}  // namespace

// -- Interval ---------------------------------------------------------------

Interval::Interval(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
  if (lo.size() != hi.size()) throw DimensionMismatch("interval bounds differ in length");
  for (Index i = 0; i < lo.size(); ++i)
    if (!(lo(i) <= hi(i))) throw std::invalid_argument("interval requires lo <= hi");
}

bool Interval::contains(const Vec& x, double tol) const {
  if (x.size() != lo.size()) return false;
  return ((x.array() >= lo.array() - tol) && (x.array() <= hi.array() + tol)).all();
}

IdList FactorIdAllocator::take(int count) {
  IdList ids(count);
  std::iota(ids.begin(), ids.end(), next_);
  next_ += count;
  return ids;
}

double FactorAssignment::alphaFor(int id) const {
  auto it = alpha.find(id);
  if (it == alpha.end()) throw MissingFactor("no value for factor id " + std::to_string(id));
  return it->second;
}

// -- PolyZonotope -------------------------------------------------------------

PolyZonotope::PolyZonotope(Vec offset, Mat dep, Mat indep, ExpMat exponents, IdList ids)
    : offset_(std::move(offset)),
      dep_(std::move(dep)),
      indep_(std::move(indep)),
      exponents_(std::move(exponents)),
      ids_(std::move(ids)) {
  const Index n = offset_.size();
  if (dep_.rows() == 0 && dep_.cols() == 0) dep_.resize(n, 0);
  if (indep_.rows() == 0 && indep_.cols() == 0) indep_.resize(n, 0);
  if (dep_.rows() != n || indep_.rows() != n)
    throw DimensionMismatch("generator rows do not match offset");
  if (exponents_.rows() == 0 && exponents_.cols() == 0 && (ids_.empty() || dep_.cols() == 0))
    exponents_.resize(static_cast<Index>(ids_.size()), dep_.cols());
  checkIds(ids_);
  checkExponents(exponents_, dep_.cols(), ids_);
}

PolyZonotope PolyZonotope::point(const Vec& c) {
  return PolyZonotope(c, Mat(c.size(), 0), Mat(c.size(), 0), ExpMat(0, 0), {});
}

// -- MatPolyZonotope ----------------------------------------------------------

MatPolyZonotope::MatPolyZonotope(Mat offset, Mat dep, Mat indep, ExpMat exponents, IdList ids)
    : offset_(std::move(offset)),
      dep_(std::move(dep)),
      indep_(std::move(indep)),
      exponents_(std::move(exponents)),
      ids_(std::move(ids)) {
  const Index n = offset_.size();
  if (dep_.rows() == 0 && dep_.cols() == 0) dep_.resize(n, 0);
  if (indep_.rows() == 0 && indep_.cols() == 0) indep_.resize(n, 0);
  if (dep_.rows() != n || indep_.rows() != n)
    throw DimensionMismatch("generator size does not match offset");
  if (exponents_.rows() == 0 && exponents_.cols() == 0 && (ids_.empty() || dep_.cols() == 0))
    exponents_.resize(static_cast<Index>(ids_.size()), dep_.cols());
  checkIds(ids_);
  checkExponents(exponents_, dep_.cols(), ids_);
}

MatPolyZonotope MatPolyZonotope::constant(const Mat& m) {
  return MatPolyZonotope(m, Mat(m.size(), 0), Mat(m.size(), 0), ExpMat(0, 0), {});
}

MatPolyZonotope MatPolyZonotope::fromVector(const PolyZonotope& p) {
  return MatPolyZonotope(Mat(p.offset()), p.dep(), p.indep(), p.exponents(), p.ids());
}

Mat MatPolyZonotope::depGen(Index i) const {
  return Eigen::Map<const Mat>(dep_.col(i).data(), rows(), cols());
}

Mat MatPolyZonotope::indepGen(Index j) const {
  return Eigen::Map<const Mat>(indep_.col(j).data(), rows(), cols());
}

PolyZonotope MatPolyZonotope::column(Index k) const {
  if (k < 0 || k >= cols()) throw std::out_of_range("column index out of range");
  const Index n = rows();
  return PolyZonotope(offset_.col(k), dep_.middleRows(k * n, n), indep_.middleRows(k * n, n),
                      exponents_, ids_);
}

PolyZonotope MatPolyZonotope::toVector() const {
  if (cols() != 1) throw DimensionMismatch("toVector requires a single column");
  return column(0);
}

// -- construction -------------------------------------------------------------

PolyZonotope make_box(const Interval& iv, const IdList& ids) {
  if (static_cast<Index>(ids.size()) != iv.dim())
    throw DimensionMismatch("make_box: need one factor id per dimension");
  const Index n = iv.dim();
  return PolyZonotope(iv.center(), Mat(iv.radius().asDiagonal()), Mat(n, 0),
                      ExpMat::Identity(n, n), ids);
}

// -- sums ---------------------------------------------------------------------

PolyZonotope mink_sum(const PolyZonotope& a, const PolyZonotope& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("mink_sum: dimension mismatch");
  const IdMerge m = mergeIds(a.ids(), b.ids());
  const Index p = static_cast<Index>(m.ids.size());
  return PolyZonotope(a.offset() + b.offset(), hcat(a.dep(), b.dep()),
                      hcat(a.indep(), b.indep()),
                      hcatExp(expandRows(a.exponents(), m.rowsA, p),
                              expandRows(b.exponents(), m.rowsB, p)),
                      m.ids);
}

MatPolyZonotope mink_sum(const MatPolyZonotope& a, const MatPolyZonotope& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("mink_sum: dimension mismatch");
  const IdMerge m = mergeIds(a.ids(), b.ids());
  const Index p = static_cast<Index>(m.ids.size());
  return MatPolyZonotope(a.offset() + b.offset(), hcat(a.dep(), b.dep()),
                         hcat(a.indep(), b.indep()),
                         hcatExp(expandRows(a.exponents(), m.rowsA, p),
                                 expandRows(b.exponents(), m.rowsB, p)),
                         m.ids);
}

PolyZonotope translate(const PolyZonotope& p, const Vec& shift) {
  if (shift.size() != p.dim()) throw DimensionMismatch("translate: dimension mismatch");
  return PolyZonotope(p.offset() + shift, p.dep(), p.indep(), p.exponents(), p.ids());
}

// -- products -----------------------------------------------------------------

MatPolyZonotope mat_mul(const MatPolyZonotope& a, const MatPolyZonotope& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul: inner dimensions differ");
  const Index n = a.rows();
  const Index m = b.cols();
  const Index sz = n * m;
  const IdMerge ids = mergeIds(a.ids(), b.ids());
  const Index p = static_cast<Index>(ids.ids.size());
  const ExpMat ea = expandRows(a.exponents(), ids.rowsA, p);
  const ExpMat eb = expandRows(b.exponents(), ids.rowsB, p);

  std::vector<Mat> ga(a.numDep()), gb(b.numDep()), gia(a.numIndep()), gib(b.numIndep());
  for (Index i = 0; i < a.numDep(); ++i) ga[i] = a.depGen(i);
  for (Index i = 0; i < b.numDep(); ++i) gb[i] = b.depGen(i);
  for (Index i = 0; i < a.numIndep(); ++i) gia[i] = a.indepGen(i);
  for (Index i = 0; i < b.numIndep(); ++i) gib[i] = b.indepGen(i);

  const Index hd = b.numDep() + a.numDep() + a.numDep() * b.numDep();
  Mat dep(sz, hd);
  ExpMat exps(p, hd);
  Index col = 0;
  for (Index j = 0; j < b.numDep(); ++j, ++col) {
    dep.col(col) = vecOf(a.offset() * gb[j]);
    exps.col(col) = eb.col(j);
  }
  for (Index i = 0; i < a.numDep(); ++i, ++col) {
    dep.col(col) = vecOf(ga[i] * b.offset());
    exps.col(col) = ea.col(i);
  }
  for (Index i = 0; i < a.numDep(); ++i)
    for (Index j = 0; j < b.numDep(); ++j, ++col) {
      dep.col(col) = vecOf(ga[i] * gb[j]);
      exps.col(col) = ea.col(i) + eb.col(j);
    }

  // Cross terms with an independent factor: coefficient in [-1,1] but the
  // dependency is lost, so bound each entry by the summed magnitudes.
  Mat box = Mat::Zero(n, m);
  for (const auto& g : ga)
    for (const auto& gi : gib) box += (g * gi).cwiseAbs();
  for (const auto& gi : gia) {
    for (const auto& g : gb) box += (gi * g).cwiseAbs();
    for (const auto& gj : gib) box += (gi * gj).cwiseAbs();
  }
  Index boxCount = 0;
  for (Index i = 0; i < sz; ++i)
    if (box.data()[i] > 0.0) ++boxCount;

  Mat indep = Mat::Zero(sz, b.numIndep() + a.numIndep() + boxCount);
  col = 0;
  for (const auto& gi : gib) indep.col(col++) = vecOf(a.offset() * gi);
  for (const auto& gi : gia) indep.col(col++) = vecOf(gi * b.offset());
  for (Index i = 0; i < sz; ++i)
    if (box.data()[i] > 0.0) indep(i, col++) = box.data()[i];

  const Compacted c = compactParts(vecOf(a.offset() * b.offset()), dep, indep, exps);
  return MatPolyZonotope(Eigen::Map<const Mat>(c.offset.data(), n, m), c.dep, c.indep,
                         c.exponents, ids.ids);
}

PolyZonotope linear_map(const Mat& mtx, const PolyZonotope& p) {
  if (mtx.cols() != p.dim()) throw DimensionMismatch("linear_map: dimension mismatch");
  return PolyZonotope(mtx * p.offset(), mtx * p.dep(), mtx * p.indep(), p.exponents(), p.ids());
}

MatPolyZonotope linear_map(const Mat& mtx, const MatPolyZonotope& p) {
  if (mtx.cols() != p.rows()) throw DimensionMismatch("linear_map: dimension mismatch");
  const Index n = mtx.rows();
  const Index m = p.cols();
  auto mapGens = [&](const Mat& gens) {
    Mat out(n * m, gens.cols());
    for (Index i = 0; i < gens.cols(); ++i) {
      Mat g = Eigen::Map<const Mat>(gens.col(i).data(), p.rows(), m);
      out.col(i) = vecOf(mtx * g);
    }
    return out;
  };
  return MatPolyZonotope(mtx * p.offset(), mapGens(p.dep()), mapGens(p.indep()), p.exponents(),
                         p.ids());
}

MatPolyZonotope right_multiply(const MatPolyZonotope& p, const Mat& mtx) {
  if (p.cols() != mtx.rows()) throw DimensionMismatch("right_multiply: dimension mismatch");
  const Index n = p.rows();
  const Index m = mtx.cols();
  auto mapGens = [&](const Mat& gens) {
    Mat out(n * m, gens.cols());
    for (Index i = 0; i < gens.cols(); ++i) {
      Mat g = Eigen::Map<const Mat>(gens.col(i).data(), n, p.cols());
      out.col(i) = vecOf(g * mtx);
    }
    return out;
  };
  return MatPolyZonotope(p.offset() * mtx, mapGens(p.dep()), mapGens(p.indep()), p.exponents(),
                         p.ids());
}

MatPolyZonotope scalar_times(const PolyZonotope& s, const Mat& pattern) {
  if (s.dim() != 1) throw DimensionMismatch("scalar_times: set must be one-dimensional");
  const Vec pat = vecOf(pattern);
  return MatPolyZonotope(s.offset()(0) * pattern, pat * s.dep(), pat * s.indep(), s.exponents(),
                         s.ids());
}

MatPolyZonotope repeat_columns(const PolyZonotope& p, Index count) {
  const Index n = p.dim();
  Mat off(n, count);
  Mat dep(n * count, p.numDep());
  Mat indep(n * count, p.numIndep());
  for (Index k = 0; k < count; ++k) {
    off.col(k) = p.offset();
    dep.middleRows(k * n, n) = p.dep();
    indep.middleRows(k * n, n) = p.indep();
  }
  return MatPolyZonotope(off, dep, indep, p.exponents(), p.ids());
}

PolyZonotope stack(const std::vector<PolyZonotope>& parts) {
  if (parts.empty()) return PolyZonotope::point(Vec(0));
  IdList ids;
  for (const auto& part : parts) {
    IdList merged;
    std::set_union(ids.begin(), ids.end(), part.ids().begin(), part.ids().end(),
                   std::back_inserter(merged));
    ids = std::move(merged);
  }
  Index n = 0, hd = 0, hi = 0;
  for (const auto& part : parts) {
    n += part.dim();
    hd += part.numDep();
    hi += part.numIndep();
  }
  Vec off(n);
  Mat dep = Mat::Zero(n, hd);
  Mat indep = Mat::Zero(n, hi);
  ExpMat exps = ExpMat::Zero(static_cast<Index>(ids.size()), hd);
  Index r = 0, cd = 0, ci = 0;
  for (const auto& part : parts) {
    const IdMerge mm = mergeIds(ids, part.ids());
    off.segment(r, part.dim()) = part.offset();
    dep.block(r, cd, part.dim(), part.numDep()) = part.dep();
    indep.block(r, ci, part.dim(), part.numIndep()) = part.indep();
    exps.middleCols(cd, part.numDep()) =
        expandRows(part.exponents(), mm.rowsB, static_cast<Index>(ids.size()));
    r += part.dim();
    cd += part.numDep();
    ci += part.numIndep();
  }
  return compact(PolyZonotope(off, dep, indep, exps, ids));
}

// -- indexing -----------------------------------------------------------------

PolyZonotope index(const PolyZonotope& p, std::span<const Index> rows) {
  const Index k = static_cast<Index>(rows.size());
  Vec off(k);
  Mat dep(k, p.numDep());
  Mat indep(k, p.numIndep());
  for (Index i = 0; i < k; ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= p.dim()) throw std::out_of_range("index: row out of range");
    off(i) = p.offset()(r);
    dep.row(i) = p.dep().row(r);
    indep.row(i) = p.indep().row(r);
  }
  return PolyZonotope(off, dep, indep, p.exponents(), p.ids());
}

PolyZonotope index(const PolyZonotope& p, Index row) {
  const Index rows[] = {row};
  return index(p, std::span<const Index>(rows));
}

MatPolyZonotope index(const MatPolyZonotope& p, std::span<const Index> rows,
                      std::span<const Index> cols) {
  const Index nr = static_cast<Index>(rows.size());
  const Index nc = static_cast<Index>(cols.size());
  Mat off(nr, nc);
  Mat dep(nr * nc, p.numDep());
  Mat indep(nr * nc, p.numIndep());
  for (Index c = 0; c < nc; ++c) {
    if (cols[c] < 0 || cols[c] >= p.cols()) throw std::out_of_range("index: column out of range");
    for (Index r = 0; r < nr; ++r) {
      if (rows[r] < 0 || rows[r] >= p.rows()) throw std::out_of_range("index: row out of range");
      const Index src = cols[c] * p.rows() + rows[r];
      off(r, c) = p.offset()(rows[r], cols[c]);
      dep.row(c * nr + r) = p.dep().row(src);
      indep.row(c * nr + r) = p.indep().row(src);
    }
  }
  return MatPolyZonotope(off, dep, indep, p.exponents(), p.ids());
}

PolyZonotope index(const MatPolyZonotope& p, Index row, Index col) {
  const Index r[] = {row};
  const Index c[] = {col};
  return index(p, std::span<const Index>(r), std::span<const Index>(c)).toVector();
}

// -- canonical form -------------------------------------------------------------

PolyZonotope compact(const PolyZonotope& p) {
  Compacted c = compactParts(p.offset(), p.dep(), p.indep(), p.exponents());
  return PolyZonotope(c.offset, c.dep, c.indep, c.exponents, p.ids());
}

MatPolyZonotope compact(const MatPolyZonotope& p) {
  Compacted c = compactParts(vecOf(p.offset()), p.dep(), p.indep(), p.exponents());
  return MatPolyZonotope(Eigen::Map<const Mat>(c.offset.data(), p.rows(), p.cols()), c.dep,
                         c.indep, c.exponents, p.ids());
}

// -- evaluation -----------------------------------------------------------------

Vec monomials(const ExpMat& exponents, const IdList& ids, const FactorAssignment& fa) {
  Vec alpha(static_cast<Index>(ids.size()));
  for (size_t k = 0; k < ids.size(); ++k) alpha(static_cast<Index>(k)) = fa.alphaFor(ids[k]);
  Vec mono = Vec::Ones(exponents.cols());
  for (Index i = 0; i < exponents.cols(); ++i)
    for (Index k = 0; k < exponents.rows(); ++k)
      if (exponents(k, i) != 0) mono(i) *= std::pow(alpha(k), exponents(k, i));
  return mono;
}

namespace {
Vec evalParts(const Vec& off, const Mat& dep, const Mat& indep, const ExpMat& e, const IdList& ids,
              const FactorAssignment& fa) {
  Vec out = off + dep * monomials(e, ids, fa);
  if (fa.beta.size() != 0) {
    if (fa.beta.size() != indep.cols())
      throw DimensionMismatch("sample: beta length does not match independent generators");
    out += indep * fa.beta;
  }
  return out;
}
}  // namespace

Vec sample(const PolyZonotope& p, const FactorAssignment& fa) {
  return evalParts(p.offset(), p.dep(), p.indep(), p.exponents(), p.ids(), fa);
}

Mat sample(const MatPolyZonotope& p, const FactorAssignment& fa) {
  Vec v = evalParts(vecOf(p.offset()), p.dep(), p.indep(), p.exponents(), p.ids(), fa);
  return Eigen::Map<const Mat>(v.data(), p.rows(), p.cols());
}

Interval interval_hull(const PolyZonotope& p) {
  Vec rad = p.dep().cwiseAbs().rowwise().sum() + p.indep().cwiseAbs().rowwise().sum();
  return Interval(p.offset() - rad, p.offset() + rad);
}

double support_upper(const PolyZonotope& p, const Vec& dir) {
  if (dir.size() != p.dim()) throw DimensionMismatch("support_upper: dimension mismatch");
  return dir.dot(p.offset()) + (dir.transpose() * p.dep()).cwiseAbs().sum() +
         (dir.transpose() * p.indep()).cwiseAbs().sum();
}

Vec support_point(const PolyZonotope& p, const Vec& dir) {
  if (dir.size() != p.dim()) throw DimensionMismatch("support_point: dimension mismatch");
  Vec pt = p.offset();
  const Eigen::RowVectorXd sd = dir.transpose() * p.dep();
  for (Index i = 0; i < sd.size(); ++i) pt += (sd(i) >= 0 ? 1.0 : -1.0) * p.dep().col(i);
  const Eigen::RowVectorXd si = dir.transpose() * p.indep();
  for (Index i = 0; i < si.size(); ++i) pt += (si(i) >= 0 ? 1.0 : -1.0) * p.indep().col(i);
  return pt;
}

LinearErrorSplit split_linear_error(const PolyZonotope& p, const IdList& inputIds) {
  std::vector<bool> isInput(p.ids().size(), false);
  for (int id : inputIds) {
    auto it = std::lower_bound(p.ids().begin(), p.ids().end(), id);
    if (it == p.ids().end() || *it != id)
      throw std::invalid_argument("split_linear_error: input id not present");
    isInput[it - p.ids().begin()] = true;
  }
  std::vector<Index> lin, err;
  for (Index i = 0; i < p.numDep(); ++i) {
    Index nonzero = 0, row = -1;
    for (Index k = 0; k < p.exponents().rows(); ++k)
      if (p.exponents()(k, i) != 0) {
        ++nonzero;
        row = k;
      }
    const bool unit = nonzero == 1 && p.exponents()(row, i) == 1 && isInput[row];
    (unit ? lin : err).push_back(i);
  }
  auto pick = [&](const std::vector<Index>& cols, Mat& g, ExpMat& e) {
    g.resize(p.dim(), static_cast<Index>(cols.size()));
    e.resize(p.exponents().rows(), static_cast<Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) {
      g.col(static_cast<Index>(j)) = p.dep().col(cols[j]);
      e.col(static_cast<Index>(j)) = p.exponents().col(cols[j]);
    }
  };
  Mat gl, ge;
  ExpMat el, ee;
  pick(lin, gl, el);
  pick(err, ge, ee);
  return {PolyZonotope(p.offset(), gl, Mat(p.dim(), 0), el, p.ids()),
          PolyZonotope(Vec::Zero(p.dim()), ge, p.indep(), ee, p.ids())};
}

bool structurally_equal(const PolyZonotope& a, const PolyZonotope& b, double tol) {
  if (a.dim() != b.dim() || a.numDep() != b.numDep() || a.numIndep() != b.numIndep() ||
      a.ids() != b.ids())
    return false;
  if (a.exponents() != b.exponents()) return false;
  auto close = [tol](const Mat& x, const Mat& y) {
    return x.size() == 0 || (x - y).cwiseAbs().maxCoeff() <= tol;
  };
  return close(a.offset(), b.offset()) && close(a.dep(), b.dep()) && close(a.indep(), b.indep());
}

// -- json -----------------------------------------------------------------------

namespace {
nlohmann::json matToJson(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matFromJson(const nlohmann::json& j, Index rows) {
  const Index cols = j.empty() ? 0 : static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}
}  // namespace

nlohmann::json to_json(const PolyZonotope& p) {
  nlohmann::json j;
  j["offset"] = std::vector<double>(p.offset().data(), p.offset().data() + p.dim());
  j["dep"] = matToJson(p.dep());
  j["indep"] = matToJson(p.indep());
  j["expMat"] = matToJson(p.exponents().cast<double>());
  j["ids"] = p.ids();
  return j;
}

PolyZonotope poly_zonotope_from_json(const nlohmann::json& j) {
  const auto off = j.at("offset").get<std::vector<double>>();
  const Index n = static_cast<Index>(off.size());
  const IdList ids = j.at("ids").get<IdList>();
  Mat dep = j.at("dep").empty() ? Mat(n, 0) : matFromJson(j.at("dep"), n);
  Mat indep = j.at("indep").empty() ? Mat(n, 0) : matFromJson(j.at("indep"), n);
  ExpMat e = j.at("expMat").empty()
                 ? ExpMat(static_cast<Index>(ids.size()), dep.cols())
                 : matFromJson(j.at("expMat"), static_cast<Index>(ids.size())).cast<int>();
  return PolyZonotope(Eigen::Map<const Vec>(off.data(), n), dep, indep, e, ids);
}

}  // namespace certipose
