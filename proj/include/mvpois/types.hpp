#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

// Domain value types shared by every module.  All of them are immutable
// after construction and validate their invariants up front, so the
// estimators and risk engines can assume well-formed inputs.

namespace mvpois {

using Index = std::int64_t;
using Count = std::int64_t;

// Vector of positive Poisson rates theta = (theta_1, ..., theta_p).
// The sum gamma and the proportions pi_i = theta_i / gamma are derived
// on demand rather than stored, so they cannot drift out of sync.
class MeanVector {
 public:
  explicit MeanVector(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.empty()) throw std::invalid_argument("MeanVector: empty");
    for (double t : theta_) {
      if (!(t > 0.0)) throw std::invalid_argument("MeanVector: components must be > 0");
    }
  }

  Index dim() const { return static_cast<Index>(theta_.size()); }
  double operator[](Index i) const { return theta_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return theta_; }

  // gamma = sum of the rates
  double sum() const { return std::accumulate(theta_.begin(), theta_.end(), 0.0); }
  double mean() const { return sum() / static_cast<double>(dim()); }

  std::vector<double> proportions() const {
    const double g = sum();
    std::vector<double> pi(theta_.size());
    for (std::size_t i = 0; i < theta_.size(); ++i) pi[i] = theta_[i] / g;
    return pi;
  }

  // mean inverse proportion (1/p) * sum 1/pi_i; at least p, with equality
  // for uniform proportions
  double mean_inverse_proportion() const {
    const double g = sum();
    double b = 0.0;
    for (double t : theta_) b += g / t;
    return b / static_cast<double>(dim());
  }

 private:
  std::vector<double> theta_;
};

// Vector of observed counts with total Z.
class CountVector {
 public:
  explicit CountVector(std::vector<Count> y) : y_(std::move(y)) {
    if (y_.empty()) throw std::invalid_argument("CountVector: empty");
    for (Count v : y_) {
      if (v < 0) throw std::invalid_argument("CountVector: counts must be >= 0");
    }
  }

  Index dim() const { return static_cast<Index>(y_.size()); }
  Count operator[](Index i) const { return y_[static_cast<std::size_t>(i)]; }
  const std::vector<Count>& values() const { return y_; }

  Count total() const { return std::accumulate(y_.begin(), y_.end(), Count{0}); }
  double mean() const { return static_cast<double>(total()) / static_cast<double>(dim()); }

  std::vector<double> as_doubles() const {
    return std::vector<double>(y_.begin(), y_.end());
  }

 private:
  std::vector<Count> y_;
};

// k x p grid of counts Y_{i,j}, e.g. k processes binned into p windows.
class CountMatrix {
 public:
  CountMatrix(Index rows, Index cols, std::vector<Count> counts)
      : rows_(rows), cols_(cols), counts_(std::move(counts)) {
    if (rows_ < 1 || cols_ < 1) throw std::invalid_argument("CountMatrix: empty shape");
    if (counts_.size() != static_cast<std::size_t>(rows_ * cols_))
      throw std::invalid_argument("CountMatrix: shape/data mismatch");
    for (Count v : counts_) {
      if (v < 0) throw std::invalid_argument("CountMatrix: counts must be >= 0");
    }
  }

  static CountMatrix from_rows(const std::vector<std::vector<Count>>& rows) {
    if (rows.empty()) throw std::invalid_argument("CountMatrix: no rows");
    const Index p = static_cast<Index>(rows.front().size());
    std::vector<Count> flat;
    flat.reserve(rows.size() * rows.front().size());
    for (const auto& r : rows) {
      if (static_cast<Index>(r.size()) != p)
        throw std::invalid_argument("CountMatrix: ragged rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return CountMatrix(static_cast<Index>(rows.size()), p, std::move(flat));
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Count operator()(Index i, Index j) const {
    return counts_[static_cast<std::size_t>(i * cols_ + j)];
  }

  // Y_i(tau): total of row i
  Count row_total(Index i) const {
    Count s = 0;
    for (Index j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }
  // Z_j: total of column j
  Count col_total(Index j) const {
    Count s = 0;
    for (Index i = 0; i < rows_; ++i) s += (*this)(i, j);
    return s;
  }
  Count total() const { return std::accumulate(counts_.begin(), counts_.end(), Count{0}); }

 private:
  Index rows_, cols_;
  std::vector<Count> counts_;
};

// Estimates live on the closed orthant: every component >= 0.  A tiny
// negative from floating roundoff is clipped; a genuine negative is a bug
// in the caller and is rejected.
class EstimateVector {
 public:
  explicit EstimateVector(std::vector<double> delta) : delta_(std::move(delta)) {
    if (delta_.empty()) throw std::invalid_argument("EstimateVector: empty");
    for (double& d : delta_) {
      if (d < 0.0) {
        if (d < -1e-9) throw std::invalid_argument("EstimateVector: negative component");
        d = 0.0;
      }
    }
  }

  Index dim() const { return static_cast<Index>(delta_.size()); }
  double operator[](Index i) const { return delta_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return delta_; }

  double sum() const { return std::accumulate(delta_.begin(), delta_.end(), 0.0); }
  double mean() const { return sum() / static_cast<double>(dim()); }

 private:
  std::vector<double> delta_;
};

}  // namespace mvpois
