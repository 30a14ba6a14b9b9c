#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mvpois/loss.hpp"
#include "mvpois/types.hpp"

// Data-only shrinkage estimators for a vector of Poisson means: the
// Clevenson-Zidek estimator and its sum-penalty generalisation delta_c,
// the psi-tunable family around it, dominators for general quadratic-form
// losses, estimators that smooth toward the grand mean, and the weighted /
// matrix variants.
//
// Shrink factors are computed as single ratios of exactly representable
// integer-valued doubles wherever possible, so that estimators which are
// algebraically identical (e.g. delta_c and the weighted form with unit
// weights) agree bit for bit.

namespace mvpois {

// Shrink-mass function psi(z) on nonnegative integers.  Valid psi are
// nondecreasing with 0 < psi(z) < 2(p-1) on the evaluated range; psi(0) may
// be 0 since the estimator multiplies it by y = 0 there.
class PsiFunction {
 public:
  // psi(z) = kappa * (p-1), kappa in (0,2)
  static PsiFunction constant_fraction(double kappa) {
    if (!(kappa > 0.0) || !(kappa < 2.0))
      throw std::invalid_argument("PsiFunction: kappa must lie in (0,2)");
    PsiFunction f;
    f.kappa_ = kappa;
    return f;
  }
  static PsiFunction table(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("PsiFunction: empty table");
    PsiFunction f;
    f.table_ = std::move(values);
    return f;
  }
  static PsiFunction closure(std::function<double(Count)> fn) {
    PsiFunction f;
    f.fn_ = std::move(fn);
    return f;
  }

  double eval(Count z, Index p) const {
    if (kappa_ > 0.0) return kappa_ * static_cast<double>(p - 1);
    if (!table_.empty()) {
      const std::size_t i = static_cast<std::size_t>(z);
      return i < table_.size() ? table_[i] : table_.back();
    }
    return fn_(z);
  }

  // Checks monotonicity and the strict bound 0 < psi < 2(p-1) over
  // z in [z_lo, z_hi]; positivity is waived at z = 0.
  void validate(Index p, Count z_lo, Count z_hi) const {
    const double bound = 2.0 * static_cast<double>(p - 1);
    double prev = -std::numeric_limits<double>::infinity();
    for (Count z = z_lo; z <= z_hi; ++z) {
      const double v = eval(z, p);
      if (!std::isfinite(v)) throw std::invalid_argument("PsiFunction: non-finite value");
      if (v < prev) throw std::invalid_argument("PsiFunction: not nondecreasing");
      if (z > 0 && !(v > 0.0))
        throw std::invalid_argument("PsiFunction: must be > 0 for z >= 1");
      if (z == 0 && v < 0.0)
        throw std::invalid_argument("PsiFunction: psi(0) must be >= 0");
      if (!(v < bound))
        throw std::invalid_argument("PsiFunction: must stay below 2(p-1)");
      prev = v;
    }
  }

 private:
  PsiFunction() = default;
  double kappa_ = 0.0;
  std::vector<double> table_;
  std::function<double(Count)> fn_;
};

// Importance weights for the weighted loss/estimator pair: all w_i inside
// an [a,b] envelope within (0,1), with total w0 above 1.
struct WeightScheme {
  std::vector<double> w;
  double a = 0.0, b = 0.0;
  explicit WeightScheme(std::vector<double> w_) : w(std::move(w_)) {
    if (w.empty()) throw std::invalid_argument("WeightScheme: no weights");
    a = *std::min_element(w.begin(), w.end());
    b = *std::max_element(w.begin(), w.end());
    if (!(a > 0.0) || !(b < 1.0))
      throw std::invalid_argument("WeightScheme: weights must lie in (0,1)");
  }
  double total() const { return std::accumulate(w.begin(), w.end(), 0.0); }
  double weighted_count(const CountVector& y) const {
    if (static_cast<Index>(w.size()) != y.dim())
      throw std::invalid_argument("WeightScheme: dimension mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      v += w[i] * static_cast<double>(y[static_cast<Index>(i)]);
    return v;
  }
};

// Summable weight sequence over an infinite index set.  tail_after(i) must
// return sum_{j > i} w_j analytically; the total w0 is accumulated until
// the remaining tail is below the tolerance.
struct InfiniteWeightScheme {
  std::function<double(Index)> weight;      // w_i, 1-based index
  std::function<double(Index)> tail_after;  // sum_{j > i} w_j
  double tail_tol = 1e-12;
  Index max_index = 1'000'000;

  double total() const {
    double w0 = 0.0;
    for (Index i = 1; i <= max_index; ++i) {
      w0 += weight(i);
      const double tail = tail_after(i);
      if (!(tail >= 0.0))
        throw std::invalid_argument("InfiniteWeightScheme: negative tail");
      if (tail < tail_tol) return w0 + tail;
    }
    throw std::invalid_argument(
        "InfiniteWeightScheme: weights did not sum within the truncation budget");
  }
};

// Maximum likelihood: delta = y.
inline EstimateVector mle(const CountVector& y) {
  return EstimateVector(y.as_doubles());
}

// delta_c: components scaled by (1+c)Z / {p-1 + (1+c)Z}.  At c = 0 this is
// the Clevenson-Zidek estimator; growing c tempers the shrinkage so the
// total is not pulled down as hard.
inline EstimateVector delta_c(const CountVector& y, double c) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("delta_c: requires p >= 2");
  if (c < 0.0) throw std::invalid_argument("delta_c: c must be >= 0");
  const double z = static_cast<double>(y.total());
  const double numer = (1.0 + c) * z;
  const double denom = static_cast<double>(p - 1) + (1.0 + c) * z;
  const double factor = numer / denom;
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) d[static_cast<std::size_t>(i)] = factor * static_cast<double>(y[i]);
  return EstimateVector(std::move(d));
}

// The psi-tunable family around delta_c: delta = {1 - psi(Z)/(p-1+(1+c)Z)} y.
// psi == p-1 reproduces delta_c exactly.
inline EstimateVector dc_family(const CountVector& y, double c, const PsiFunction& psi) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("dc_family: requires p >= 2");
  if (c < 0.0) throw std::invalid_argument("dc_family: c must be >= 0");
  const Count z = y.total();
  psi.validate(p, 0, z + 1);
  const double denom = static_cast<double>(p - 1) + (1.0 + c) * static_cast<double>(z);
  const double factor = (denom - psi.eval(z, p)) / denom;
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) d[static_cast<std::size_t>(i)] = factor * static_cast<double>(y[i]);
  return EstimateVector(std::move(d));
}

// T(y) = sum_{j<=y} 1/j, the truncated harmonic sum, with T(0) = 0.
inline double harmonic_T(Count y) {
  double t = 0.0;
  for (Count j = 1; j <= y; ++j) t += 1.0 / static_cast<double>(j);
  return t;
}

// B(y) = sum_i T(y_i) T(y_i + 1).
inline double harmonic_B(const CountVector& y) {
  double b = 0.0;
  for (Index i = 0; i < y.dim(); ++i)
    b += harmonic_T(y[i]) * harmonic_T(y[i] + 1);
  return b;
}

enum class ZeroCountVariant {
  kPositive,  // N(y) counts coordinates with y_i >= 1 (default)
  kAtMostOne  // N(y) counts coordinates with y_i <= 1 (for auditing)
};

inline Index active_count(const CountVector& y, ZeroCountVariant variant) {
  Index n = 0;
  for (Index i = 0; i < y.dim(); ++i) {
    const bool hit = variant == ZeroCountVariant::kPositive ? (y[i] >= 1) : (y[i] <= 1);
    if (hit) ++n;
  }
  return n;
}

// psi_0 correction vector for the quadratic-form dominator:
// psi_{0,i}(y) = d(y)/B(y) * T(y_i) with d(y) = (1/M) {N(y) - 2}_+ unless a
// d override is supplied.  Zero when B(y) = 0 or the truncation kicks in.
inline std::vector<double> quad_psi0(const CountVector& y, double bound_m,
                                     ZeroCountVariant variant,
                                     const std::function<double(const CountVector&)>* d_fn) {
  const Index p = y.dim();
  std::vector<double> psi(static_cast<std::size_t>(p), 0.0);
  const double b = harmonic_B(y);
  if (b == 0.0) return psi;
  double d;
  if (d_fn) {
    d = (*d_fn)(y);
    if (d < 0.0) throw std::invalid_argument("quad_psi0: d(y) must be >= 0");
  } else {
    const double excess = static_cast<double>(active_count(y, variant) - 2);
    d = excess > 0.0 ? excess / bound_m : 0.0;
  }
  if (d == 0.0) return psi;
  for (Index i = 0; i < p; ++i)
    psi[static_cast<std::size_t>(i)] = d / b * harmonic_T(y[i]);
  return psi;
}

// Dominates the MLE under the quadratic-form loss when p >= 3:
// delta = y - A^{-1} psi_0(y).
inline EstimateVector quad_dominator(
    const CountVector& y, const QuadraticForm& qf,
    const std::function<double(const CountVector&)>* d_override = nullptr,
    ZeroCountVariant variant = ZeroCountVariant::kPositive) {
  const Index p = y.dim();
  if (p < 3) throw std::invalid_argument("quad_dominator: requires p >= 3");
  if (qf.a.dim() != p) throw std::invalid_argument("quad_dominator: dimension mismatch");
  const std::vector<double> psi = quad_psi0(y, qf.bound_m, variant, d_override);
  bool all_zero = true;
  for (double v : psi)
    if (v != 0.0) all_zero = false;
  if (all_zero) return mle(y);
  const std::vector<double> corr = qf.a.solve_spd(psi);
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] =
        static_cast<double>(y[i]) - corr[static_cast<std::size_t>(i)];
  return EstimateVector(std::move(d));
}

struct CumulativeEstimate {
  EstimateVector rates;        // estimates of the per-window means
  EstimateVector cumulatives;  // estimates of lambda_i = sum_{j<=i} theta_j
};

// Improves on the raw counts when the target is the cumulative intensity:
// the psi_0 corrections (with M = 4) are pushed through the
// second-difference stencil of the cumulative loss matrix.
inline CumulativeEstimate cumulative_estimator(const CountVector& y) {
  const Index p = y.dim();
  if (p < 3) throw std::invalid_argument("cumulative_estimator: requires p >= 3");
  const std::vector<double> psi =
      quad_psi0(y, 4.0, ZeroCountVariant::kPositive, nullptr);
  auto at = [&](Index i) { return psi[static_cast<std::size_t>(i)]; };

  std::vector<double> d(static_cast<std::size_t>(p));
  d[0] = static_cast<double>(y[0]) - at(0) + at(1);
  for (Index i = 1; i + 1 < p; ++i)
    d[static_cast<std::size_t>(i)] =
        static_cast<double>(y[i]) + at(i - 1) - 2.0 * at(i) + at(i + 1);
  d[static_cast<std::size_t>(p - 1)] =
      static_cast<double>(y[p - 1]) + at(p - 2) - 2.0 * at(p - 1);

  std::vector<double> lam(static_cast<std::size_t>(p));
  Count running = 0;
  for (Index i = 0; i < p; ++i) {
    running += y[i];
    lam[static_cast<std::size_t>(i)] =
        (i + 1 < p) ? static_cast<double>(running) - at(i) + at(i + 1)
                    : static_cast<double>(running) - at(i);
  }
  return CumulativeEstimate{EstimateVector(std::move(d)), EstimateVector(std::move(lam))};
}

// Shrinks toward the grand mean inside the region where the proportions
// stay above 1/b0 of uniform: delta_i = y_i - g(Z) (y_i - ybar) with
// g(z) = (p-1)/{p-1 + (b0-1) z}.  The total is preserved exactly.
inline EstimateVector mean_shrink_b0(const CountVector& y, double b0) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("mean_shrink_b0: requires p >= 2");
  if (!(b0 > 1.0)) throw std::invalid_argument("mean_shrink_b0: b0 must be > 1");
  const double z = static_cast<double>(y.total());
  const double g = static_cast<double>(p - 1) /
                   (static_cast<double>(p - 1) + (b0 - 1.0) * z);
  const double ybar = z / static_cast<double>(p);
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] =
        static_cast<double>(y[i]) - g * (static_cast<double>(y[i]) - ybar);
  return EstimateVector(std::move(d));
}

inline double careful_shrink_g0(Count z, Index p) {
  const double pd = static_cast<double>(p);
  const double zd = static_cast<double>(z);
  return (pd - 1.0) / (pd - 1.0 - zd + 0.5 * zd * zd / pd);
}

// Mean smoothing gated on every count being positive; the denominator of
// g0 stays positive only for p >= 3.  The total is preserved exactly.
inline EstimateVector mean_shrink_careful(const CountVector& y) {
  const Index p = y.dim();
  if (p < 3) throw std::invalid_argument("mean_shrink_careful: requires p >= 3");
  bool all_positive = true;
  for (Index i = 0; i < p; ++i)
    if (y[i] == 0) all_positive = false;
  if (!all_positive) return mle(y);
  const Count z = y.total();
  const double g = careful_shrink_g0(z, p);
  const double ybar = static_cast<double>(z) / static_cast<double>(p);
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] =
        static_cast<double>(y[i]) - g * (static_cast<double>(y[i]) - ybar);
  return EstimateVector(std::move(d));
}

// Weighted generalisation of the Clevenson-Zidek estimator:
// delta = {1 - (w0-1)/(w0-1+v)} y = [v / (w0-1+v)] y with v = sum w_i y_i.
inline EstimateVector weighted_cz(const CountVector& y, const WeightScheme& w) {
  const double w0 = w.total();
  if (!(w0 > 1.0)) throw std::invalid_argument("weighted_cz: requires w0 > 1");
  const double v = w.weighted_count(y);
  const double factor = v / (w0 - 1.0 + v);
  std::vector<double> d(static_cast<std::size_t>(y.dim()));
  for (Index i = 0; i < y.dim(); ++i)
    d[static_cast<std::size_t>(i)] = factor * static_cast<double>(y[i]);
  return EstimateVector(std::move(d));
}

// Generalised form delta = {1 - psi(v)/(w0 - eps + v)} y, requiring
// w0 > eps; psi == w0 - 1 with eps = 1 reproduces weighted_cz.
inline EstimateVector weighted_cz_general(const CountVector& y, const WeightScheme& w,
                                          const std::function<double(double)>& psi,
                                          double eps) {
  const double w0 = w.total();
  if (!(w0 > eps)) throw std::invalid_argument("weighted_cz_general: requires w0 > eps");
  const double v = w.weighted_count(y);
  const double denom = w0 - eps + v;
  const double factor = (denom - psi(v)) / denom;
  std::vector<double> d(static_cast<std::size_t>(y.dim()));
  for (Index i = 0; i < y.dim(); ++i)
    d[static_cast<std::size_t>(i)] = factor * static_cast<double>(y[i]);
  return EstimateVector(std::move(d));
}

// Sparse counts over an infinite index set: index -> nonzero count.
using SparseCounts = std::map<Index, Count>;

// Infinite-coordinate variant: only finitely many counts are nonzero, the
// weight tail enters through w0 alone, and zero entries stay zero so the
// result is returned sparsely.
inline std::map<Index, double> weighted_cz_truncated(const SparseCounts& y,
                                                     const InfiniteWeightScheme& w) {
  for (const auto& [i, cnt] : y) {
    if (i < 1) throw std::invalid_argument("weighted_cz_truncated: indices are 1-based");
    if (cnt < 0) throw std::invalid_argument("weighted_cz_truncated: negative count");
  }
  const double w0 = w.total();
  if (!(w0 > 1.0)) throw std::invalid_argument("weighted_cz_truncated: requires w0 > 1");
  double v = 0.0;
  for (const auto& [i, cnt] : y) v += w.weight(i) * static_cast<double>(cnt);
  const double factor = v / (w0 - 1.0 + v);
  std::map<Index, double> out;
  for (const auto& [i, cnt] : y)
    if (cnt > 0) out[i] = factor * static_cast<double>(cnt);
  return out;
}

// Estimates a k x p grid of rates, borrowing strength across rows through
// the column totals Z_j and across everything through the grand total:
// delta_{i,j} = (1+c)(p-1+Z_j) / {p-1+(1+c)Z} * Y_{i,j}.
inline std::vector<std::vector<double>> matrix_shrinker(const CountMatrix& y, double c) {
  if (c < 0.0) throw std::invalid_argument("matrix_shrinker: c must be >= 0");
  const Index k = y.rows(), p = y.cols();
  const double z = static_cast<double>(y.total());
  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(k),
      std::vector<double>(static_cast<std::size_t>(p), 0.0));
  if (y.total() == 0) return out;  // p = 1 included: no shrinkage direction
  const double denom = static_cast<double>(p - 1) + (1.0 + c) * z;
  for (Index j = 0; j < p; ++j) {
    const double zj = static_cast<double>(y.col_total(j));
    const double factor = (1.0 + c) * (static_cast<double>(p - 1) + zj) / denom;
    for (Index i = 0; i < k; ++i)
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          factor * static_cast<double>(y(i, j));
  }
  return out;
}

}  // namespace mvpois
