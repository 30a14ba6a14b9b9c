#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mvpois/shrinkers.hpp"
#include "mvpois/types.hpp"

// Bayes, hierarchical-Bayes, and empirical-Bayes estimators built from
// Gamma rate priors and sum x Dirichlet constructions.  Throughout, Gamma
// priors are parametrised by (shape, rate), so the prior mean is
// shape/rate.

namespace mvpois {

// Independent Gamma(alpha_i, beta) priors for the rates, common rate beta.
struct GammaPriorVec {
  std::vector<double> alpha;
  double beta = 1.0;

  GammaPriorVec(std::vector<double> alpha_, double beta_)
      : alpha(std::move(alpha_)), beta(beta_) {
    if (alpha.empty()) throw std::invalid_argument("GammaPriorVec: empty alpha");
    for (double a : alpha)
      if (!(a > 0.0)) throw std::invalid_argument("GammaPriorVec: alpha must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("GammaPriorVec: beta must be > 0");
  }

  double alpha_bar() const {
    return std::accumulate(alpha.begin(), alpha.end(), 0.0) /
           static_cast<double>(alpha.size());
  }
};

// Hyperprior s(beta) proportional to beta^{eta-1} (beta+1)^{-(eta+zeta)}
// for the common Gamma rate in the hierarchical construction.
struct HyperPrior {
  double eta = 1.0;
  double zeta = 1.0;

  HyperPrior(double eta_, double zeta_) : eta(eta_), zeta(zeta_) {
    if (!(eta > 0.0) || !(zeta > 0.0))
      throw std::invalid_argument("HyperPrior: eta and zeta must be > 0");
  }
};

// Inverse posterior moments: a_i = 1/E(1/theta_i | y), their sum a, and
// b = 1/E(1/gamma | y).  a_i = 0 encodes an infinite inverse moment, which
// forces the corresponding estimate to zero.
struct PosteriorMoments {
  std::vector<double> a_i;
  double b = 0.0;

  PosteriorMoments(std::vector<double> a_i_, double b_) : a_i(std::move(a_i_)), b(b_) {
    if (a_i.empty()) throw std::invalid_argument("PosteriorMoments: empty");
    for (double v : a_i)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("PosteriorMoments: a_i must be finite and >= 0");
    if (!(b >= 0.0) || !std::isfinite(b))
      throw std::invalid_argument("PosteriorMoments: b must be finite and >= 0");
  }

  double a_total() const { return std::accumulate(a_i.begin(), a_i.end(), 0.0); }
};

// Posterior-expected-loss minimiser under the sum-penalised weighted loss:
// delta_i = (1+c)/(1 + c a/b) * a_i.  With c = 0 this is the familiar
// inverse-moment solution a_i itself.
inline EstimateVector bayes_general_Lc(const PosteriorMoments& m, double c) {
  if (c < 0.0) throw std::invalid_argument("bayes_general_Lc: c must be >= 0");
  const double a = m.a_total();
  if (c == 0.0 || a == 0.0) return EstimateVector(m.a_i);
  if (!(m.b > 0.0))
    throw std::invalid_argument("bayes_general_Lc: b must be > 0 unless all a_i are 0");
  const double factor = (1.0 + c) / (1.0 + c * a / m.b);
  std::vector<double> d(m.a_i.size());
  for (std::size_t i = 0; i < m.a_i.size(); ++i) d[i] = factor * m.a_i[i];
  return EstimateVector(std::move(d));
}

namespace detail {

// Estimates vanish when the posterior inverse moment diverges, i.e. when
// alpha_i <= 1 and y_i = 0; with alpha_i < 1 the raw formula would go
// negative there, so zero is substituted.
inline double gamma_component(double alpha_i, Count y_i) {
  if (y_i == 0 && alpha_i <= 1.0) return 0.0;
  return alpha_i + static_cast<double>(y_i) - 1.0;
}

}  // namespace detail

// Conjugate Bayes estimator under independent Gamma(alpha_i, beta) priors:
// delta_i = h_c(Z) (alpha_i + y_i - 1)/(beta + 1) with
// h_c(z) = (1+c)(p abar + z - 1) / [(1+c)(p abar + z - 1) - c(p-1)].
inline EstimateVector bayes_gamma(const CountVector& y, const GammaPriorVec& prior,
                                  double c) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("bayes_gamma: requires p >= 2");
  if (static_cast<Index>(prior.alpha.size()) != p)
    throw std::invalid_argument("bayes_gamma: prior dimension mismatch");
  if (c < 0.0) throw std::invalid_argument("bayes_gamma: c must be >= 0");
  const double z = static_cast<double>(y.total());
  const double pab = static_cast<double>(p) * prior.alpha_bar();
  const double numer = (1.0 + c) * (pab + z - 1.0);
  const double denom = numer - c * static_cast<double>(p - 1);
  if (!(denom > 0.0)) throw std::invalid_argument("bayes_gamma: nonpositive denominator");
  const double h = numer / denom;
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] =
        h * (detail::gamma_component(prior.alpha[static_cast<std::size_t>(i)], y[i]) /
             (prior.beta + 1.0));
  return EstimateVector(std::move(d));
}

// Law of the prior for the total gamma in the sum x proportions
// construction: flat on the halfline, or Gamma(alpha0, beta0).
struct FlatSumLaw {};
struct GammaSumLaw {
  double alpha0 = 1.0;
  double beta0 = 1.0;
  GammaSumLaw(double a0, double b0) : alpha0(a0), beta0(b0) {
    if (!(alpha0 > 0.0) || !(beta0 > 0.0))
      throw std::invalid_argument("GammaSumLaw: parameters must be > 0");
  }
};
using SumLaw = std::variant<FlatSumLaw, GammaSumLaw>;

// K(z) = integral of gamma^z e^{-gamma} q(gamma); only the ratio
// K(z)/K(z-1) enters the estimators.
inline double k_ratio(const SumLaw& law, Count z) {
  if (z < 1) throw std::invalid_argument("k_ratio: needs z >= 1");
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, FlatSumLaw>)
          return static_cast<double>(z);
        else
          return (l.alpha0 + static_cast<double>(z) - 1.0) / (l.beta0 + 1.0);
      },
      law);
}

// Bayes estimator under uniform Dirichlet proportions with an arbitrary
// sum law: delta_i = [K(Z)/K(Z-1)] (1+c)/{p-1+(1+c)Z} y_i.  The flat sum
// law reproduces delta_c exactly, which identifies delta_c as a
// generalised Bayes estimator.
inline EstimateVector bayes_sum_dirichlet(const CountVector& y, double c,
                                          const SumLaw& sum_law) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("bayes_sum_dirichlet: requires p >= 2");
  if (c < 0.0) throw std::invalid_argument("bayes_sum_dirichlet: c must be >= 0");
  const Count z = y.total();
  std::vector<double> d(static_cast<std::size_t>(p), 0.0);
  if (z == 0) return EstimateVector(std::move(d));  // all counts zero
  const double denom = static_cast<double>(p - 1) + (1.0 + c) * static_cast<double>(z);
  const double factor = (1.0 + c) * k_ratio(sum_law, z) / denom;
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] = factor * static_cast<double>(y[i]);
  return EstimateVector(std::move(d));
}

// Hierarchical construction: unit-shape Gamma rates whose common rate beta
// carries the HyperPrior.  delta_i =
// [(1+c)(p-1+z)/{p-1+(1+c)z}] [(z+zeta-1)/(p+eta+zeta+z-1)] y_i.
inline EstimateVector hierarchical_bayes(const CountVector& y, const HyperPrior& h,
                                         double c) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("hierarchical_bayes: requires p >= 2");
  if (c < 0.0) throw std::invalid_argument("hierarchical_bayes: c must be >= 0");
  const double z = static_cast<double>(y.total());
  const double pd = static_cast<double>(p);
  // At z = 0 with zeta < 1 the beta-factor is negative, but y = 0 makes the
  // estimate zero regardless.
  if (y.total() == 0)
    return EstimateVector(std::vector<double>(static_cast<std::size_t>(p), 0.0));
  const double lead = (1.0 + c) * (pd - 1.0 + z) / (pd - 1.0 + (1.0 + c) * z);
  const double beta_factor = (z + h.zeta - 1.0) / (pd + h.eta + h.zeta + z - 1.0);
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] = lead * beta_factor * static_cast<double>(y[i]);
  return EstimateVector(std::move(d));
}

// The shrink-mass function induced by the hierarchical estimator,
// psi(z) = (1+c)(p-1+z)(p+eta)/(p-1+eta+zeta+z) - c(p-1).  It is
// nondecreasing and approaches (1+c)(p+eta) - c(p-1) from below.
inline std::function<double(Count)> hb_induced_psi(Index p, double c,
                                                   const HyperPrior& h) {
  const double pd = static_cast<double>(p);
  return [pd, c, h](Count z) {
    const double zd = static_cast<double>(z);
    return (1.0 + c) * (pd - 1.0 + zd) * (pd + h.eta) / (pd - 1.0 + h.eta + h.zeta + zd) -
           c * (pd - 1.0);
  };
}

// Minimaxity/dominance condition for the hierarchical estimator:
// eta <= (p - 2 - c)/(1 + c) keeps the induced shrink mass below 2(p-1).
inline bool hb_is_dominating(Index p, double c, const HyperPrior& h) {
  return h.eta <= (static_cast<double>(p) - 2.0 - c) / (1.0 + c);
}

// Empirical Bayes with known shapes alpha_i and the common rate estimated
// from the total: delta_i = h_c(Z) (alpha_i + Y_i - 1) with
// h_c(z) = (1+c) z / [(1+c)(p abar + z - 1) - c(p-1)].  With alpha == 1 it
// collapses to delta_c.
inline EstimateVector empirical_bayes(const CountVector& y,
                                      const std::vector<double>& alpha, double c) {
  const Index p = y.dim();
  if (p < 2) throw std::invalid_argument("empirical_bayes: requires p >= 2");
  if (static_cast<Index>(alpha.size()) != p)
    throw std::invalid_argument("empirical_bayes: alpha dimension mismatch");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("empirical_bayes: alpha must be > 0");
  if (c < 0.0) throw std::invalid_argument("empirical_bayes: c must be >= 0");
  const double z = static_cast<double>(y.total());
  const double pab =
      static_cast<double>(p) *
      (std::accumulate(alpha.begin(), alpha.end(), 0.0) / static_cast<double>(p));
  const double denom = (1.0 + c) * (pab + z - 1.0) - c * static_cast<double>(p - 1);
  if (!(denom > 0.0))
    throw std::invalid_argument("empirical_bayes: nonpositive denominator");
  const double h = (1.0 + c) * z / denom;
  std::vector<double> d(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] =
        h * detail::gamma_component(alpha[static_cast<std::size_t>(i)], y[i]);
  return EstimateVector(std::move(d));
}

// Per-row Gamma priors for the totals of a k x p count grid.
struct RowPrior {
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

// Bayes estimator for the k x p grid under one shared Dirichlet draw for
// the column proportions and independent Gamma row totals:
// delta_{i,j} = [(1+c)(p abar + Z_j - 1) / {(1+c)(p abar + Z - 1) - c(p-1)}]
//               * (alpha0_i + Y_i(tau) - 1)/(beta0_i + 1).
inline std::vector<std::vector<double>> bayes_matrix(
    const CountMatrix& y, const std::vector<double>& alpha_cols,
    const std::vector<RowPrior>& row_priors, double c) {
  const Index k = y.rows(), p = y.cols();
  if (p < 2) throw std::invalid_argument("bayes_matrix: requires p >= 2");
  if (static_cast<Index>(alpha_cols.size()) != p)
    throw std::invalid_argument("bayes_matrix: alpha dimension mismatch");
  if (static_cast<Index>(row_priors.size()) != k)
    throw std::invalid_argument("bayes_matrix: row prior dimension mismatch");
  if (c < 0.0) throw std::invalid_argument("bayes_matrix: c must be >= 0");
  const double z = static_cast<double>(y.total());
  const double pab = std::accumulate(alpha_cols.begin(), alpha_cols.end(), 0.0);
  const double denom = (1.0 + c) * (pab + z - 1.0) - c * static_cast<double>(p - 1);
  if (!(denom > 0.0)) throw std::invalid_argument("bayes_matrix: nonpositive denominator");

  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(k),
      std::vector<double>(static_cast<std::size_t>(p), 0.0));
  for (Index i = 0; i < k; ++i) {
    const RowPrior& rp = row_priors[static_cast<std::size_t>(i)];
    if (!(rp.alpha0 > 0.0) || !(rp.beta0 > 0.0))
      throw std::invalid_argument("bayes_matrix: row prior parameters must be > 0");
    const double row_part =
        detail::gamma_component(rp.alpha0, y.row_total(i)) / (rp.beta0 + 1.0);
    for (Index j = 0; j < p; ++j) {
      const double zj = static_cast<double>(y.col_total(j));
      const double lead = (1.0 + c) * (pab + zj - 1.0) / denom;
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = lead * row_part;
    }
  }
  return out;
}

}  // namespace mvpois
