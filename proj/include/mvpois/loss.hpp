#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mvpois/types.hpp"

// Loss functions and the quadratic-form machinery.  Four losses are
// supported:
//
//   QuadraticForm   (delta - theta)^T A (delta - theta), A symmetric PD
//   WeightedLc      sum (delta_i - theta_i)^2 / theta_i
//                     + c (sum delta - gamma)^2 / gamma
//   WeightedW       sum w_i (delta_i - theta_i)^2 / theta_i
//   MatrixLc        WeightedLc applied row by row of a count matrix
//
// The quadratic-form builders record the bound constant M with
// psi^T A^{-1} psi <= M sum psi_i^2 (M = 1/lambda_min in general).

namespace mvpois {

// Dense symmetric matrix, value semantics, row-major storage.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(Index p) : p_(p), a_(static_cast<std::size_t>(p * p), 0.0) {
    if (p < 1) throw std::invalid_argument("SymmetricMatrix: dimension must be >= 1");
  }
  static SymmetricMatrix identity(Index p) {
    SymmetricMatrix m(p);
    for (Index i = 0; i < p; ++i) m(i, i) = 1.0;
    return m;
  }
  static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const Index p = static_cast<Index>(rows.size());
    SymmetricMatrix m(p);
    for (Index i = 0; i < p; ++i) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != p)
        throw std::invalid_argument("SymmetricMatrix: not square");
      for (Index j = 0; j < p; ++j)
        m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    m.check_symmetric();
    return m;
  }

  Index dim() const { return p_; }
  double& operator()(Index i, Index j) { return a_[static_cast<std::size_t>(i * p_ + j)]; }
  double operator()(Index i, Index j) const {
    return a_[static_cast<std::size_t>(i * p_ + j)];
  }
  const std::vector<double>& data() const { return a_; }

  void check_symmetric(double tol = 1e-12) const {
    double scale = 0.0;
    for (double v : a_) scale = std::max(scale, std::abs(v));
    for (Index i = 0; i < p_; ++i)
      for (Index j = i + 1; j < p_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol * std::max(1.0, scale))
          throw std::invalid_argument("SymmetricMatrix: not symmetric");
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(p_, p_);
    for (Index i = 0; i < p_; ++i)
      for (Index j = 0; j < p_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  double quad_form(const std::vector<double>& v) const {
    double s = 0.0;
    for (Index i = 0; i < p_; ++i)
      for (Index j = 0; j < p_; ++j)
        s += v[static_cast<std::size_t>(i)] * (*this)(i, j) * v[static_cast<std::size_t>(j)];
    return s;
  }

  std::vector<double> eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("SymmetricMatrix: eigensolver failed");
    std::vector<double> ev(static_cast<std::size_t>(p_));
    for (Index i = 0; i < p_; ++i) ev[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return ev;  // ascending
  }

  double min_eigenvalue() const { return eigenvalues().front(); }

  // Solve A x = b for symmetric positive-definite A.
  std::vector<double> solve_spd(const std::vector<double>& b) const {
    if (static_cast<Index>(b.size()) != p_)
      throw std::invalid_argument("solve_spd: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(to_eigen());
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("solve_spd: matrix not positive definite");
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), p_);
    Eigen::VectorXd x = llt.solve(rhs);
    return std::vector<double>(x.data(), x.data() + p_);
  }

 private:
  Index p_;
  std::vector<double> a_;
};

// Quadratic-form loss with its recorded bound constant M.
struct QuadraticForm {
  SymmetricMatrix a;
  double bound_m;  // psi^T A^{-1} psi <= bound_m * sum psi_i^2

  static QuadraticForm from_matrix(SymmetricMatrix m) {
    m.check_symmetric();
    const double lmin = m.min_eigenvalue();
    if (!(lmin > 0.0))
      throw std::invalid_argument("QuadraticForm: matrix not positive definite");
    return QuadraticForm{std::move(m), 1.0 / lmin};
  }
};

struct WeightedLc {
  double c = 0.0;
  explicit WeightedLc(double c_) : c(c_) {
    if (c < 0.0) throw std::invalid_argument("WeightedLc: c must be >= 0");
  }
};

// Importance weights w_i in (0,1) with their recorded [a,b] envelope.
struct WeightedW {
  std::vector<double> w;
  double a = 0.0, b = 0.0;  // envelope
  explicit WeightedW(std::vector<double> w_) : w(std::move(w_)) {
    if (w.empty()) throw std::invalid_argument("WeightedW: no weights");
    a = *std::min_element(w.begin(), w.end());
    b = *std::max_element(w.begin(), w.end());
    if (!(a > 0.0) || !(b < 1.0))
      throw std::invalid_argument("WeightedW: weights must lie in (0,1)");
  }
  double total() const { return std::accumulate(w.begin(), w.end(), 0.0); }
};

struct MatrixLc {
  double c = 0.0;
  explicit MatrixLc(double c_) : c(c_) {
    if (c < 0.0) throw std::invalid_argument("MatrixLc: c must be >= 0");
  }
};

using LossSpec = std::variant<QuadraticForm, WeightedLc, WeightedW, MatrixLc>;

// A0 = I + c * e e^T: 1+c on the diagonal, c elsewhere.  Its spectrum is
// {1 (p-1 times), 1+cp}, so the recorded bound is M = 1.
inline QuadraticForm build_sum_penalty_matrix(Index p, double c) {
  if (p < 1) throw std::invalid_argument("build_sum_penalty_matrix: p must be >= 1");
  if (c < 0.0) throw std::invalid_argument("build_sum_penalty_matrix: c must be >= 0");
  SymmetricMatrix m(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = (i == j) ? 1.0 + c : c;
  return QuadraticForm{std::move(m), 1.0};
}

// a_{i,j} = p + 1 - max(i,j) (1-based), the loss matrix for estimating the
// cumulative intensities lambda_i = sum_{j<=i} theta_j.  The inverse is the
// second-difference stencil, whose largest eigenvalue stays below 4, so the
// recorded bound is M = 4.
inline QuadraticForm build_cumulative_matrix(Index p) {
  if (p < 2) throw std::invalid_argument("build_cumulative_matrix: p must be >= 2");
  SymmetricMatrix m(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      m(i, j) = static_cast<double>(p + 1 - std::max(i, j) - 1);
  return QuadraticForm{std::move(m), 4.0};
}

// 1 / lambda_min(A), the tight constant with psi^T A^{-1} psi <= M |psi|^2.
inline double loss_matrix_bound_M(const SymmetricMatrix& a) {
  a.check_symmetric();
  const double lmin = a.min_eigenvalue();
  if (!(lmin > 0.0))
    throw std::invalid_argument("loss_matrix_bound_M: matrix not positive definite");
  return 1.0 / lmin;
}

namespace detail {

inline void check_same_dim(Index a, Index b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline double weighted_sq_error(const MeanVector& theta, const EstimateVector& delta,
                                const std::vector<double>* w) {
  double s = 0.0;
  for (Index i = 0; i < theta.dim(); ++i) {
    const double d = delta[i] - theta[i];
    const double wi = w ? (*w)[static_cast<std::size_t>(i)] : 1.0;
    s += wi * d * d / theta[i];
  }
  return s;
}

}  // namespace detail

inline double eval_loss(const LossSpec& loss, const MeanVector& theta,
                        const EstimateVector& delta) {
  detail::check_same_dim(theta.dim(), delta.dim(), "eval_loss");
  return std::visit(
      [&](const auto& spec) -> double {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, QuadraticForm>) {
          detail::check_same_dim(spec.a.dim(), theta.dim(), "eval_loss");
          std::vector<double> diff(static_cast<std::size_t>(theta.dim()));
          for (Index i = 0; i < theta.dim(); ++i)
            diff[static_cast<std::size_t>(i)] = delta[i] - theta[i];
          return spec.a.quad_form(diff);
        } else if constexpr (std::is_same_v<T, WeightedLc> ||
                             std::is_same_v<T, MatrixLc>) {
          // A one-row count matrix reduces MatrixLc to WeightedLc.
          const double g = theta.sum();
          const double ds = delta.sum() - g;
          return detail::weighted_sq_error(theta, delta, nullptr) + spec.c * ds * ds / g;
        } else {
          detail::check_same_dim(static_cast<Index>(spec.w.size()), theta.dim(),
                                 "eval_loss");
          return detail::weighted_sq_error(theta, delta, &spec.w);
        }
      },
      loss);
}

// Row-wise L_c over a k x p grid: each process is penalised on its own
// components and on its row total.
inline double eval_loss_matrix(const MatrixLc& loss,
                               const std::vector<MeanVector>& theta_rows,
                               const std::vector<EstimateVector>& delta_rows) {
  detail::check_same_dim(static_cast<Index>(theta_rows.size()),
                         static_cast<Index>(delta_rows.size()), "eval_loss_matrix");
  double total = 0.0;
  const WeightedLc row_loss(loss.c);
  for (std::size_t i = 0; i < theta_rows.size(); ++i)
    total += eval_loss(row_loss, theta_rows[i], delta_rows[i]);
  return total;
}

}  // namespace mvpois
