#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bandit/rng.hpp"

namespace bandit {

using Vec = std::vector<double>;

// Dense row-major matrix. Sized for this project's solves (tens to a few
// hundred rows, tens of columns); not a general linear-algebra library.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }
  void append_row(std::span<const double> r);

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Thrown on precondition/contract violations across the library.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
inline void require(bool ok, const char* msg) {
  if (!ok) throw ContractViolation(msg);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

// Rank-revealing Householder QR with column pivoting. When the matrix is
// rank deficient the factor is completed to a complete orthogonal
// decomposition so that solve() returns the minimum-norm least-squares
// solution. A factor object can be re-loaded in place; the bootstrap loops
// reuse one instance to keep the hot path allocation-free.
class QrFactor {
 public:
  QrFactor() = default;

  void load(const Mat& x);
  // Factor the row-gather X[idx[0]], X[idx[1]], ... (bootstrap resamples).
  void load_rows(const Mat& x, std::span<const std::uint32_t> idx);

  static QrFactor of(const Mat& x) {
    QrFactor f;
    f.load(x);
    return f;
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::size_t rank() const { return rank_; }

  // Minimum-norm least-squares solution of X b = y. y.size() == rows().
  // Uses internal scratch; not safe to share one factor across threads.
  void solve(std::span<const double> y, Vec& beta);

 private:
  void factor();

  std::size_t m_ = 0, n_ = 0, rank_ = 0;
  std::vector<double> a_;     // m x n column-major; R on/above diag, v below
  std::vector<double> tau_;   // Householder scalars (left reflectors)
  std::vector<double> ztau_;  // right reflectors (rank-deficient case only)
  std::vector<int> jpvt_;     // factor column k holds original column jpvt_[k]
  std::vector<double> norm2_, orig2_;  // pivoting scratch
  std::vector<double> qty_, u_;        // solve scratch
};

// beta minimizing ||y - X beta||; minimum-norm when X'X is singular.
Vec least_squares(const Mat& x, const Vec& y);

// (X'X + lambda I)^{-1} X'y. lambda == 0 falls back to least_squares when
// the Gram matrix is not positive definite.
Vec ridge_solve(const Mat& x, const Vec& y, double lambda);

// ---------------------------------------------------------------------------
// Symmetric positive-definite solves (full row-major storage)
// ---------------------------------------------------------------------------

// In-place lower Cholesky factor of symmetric A. Returns false if a pivot
// falls below the relative threshold (matrix not numerically PD).
bool cholesky_in_place(std::vector<double>& a, std::size_t n);
// Solve L L' x = b.
void chol_solve(const std::vector<double>& l, std::size_t n,
                std::span<const double> b, std::span<double> x);
// Solve L x = b.
void chol_forward(const std::vector<double>& l, std::size_t n,
                  std::span<const double> b, std::span<double> x);
// Solve L' x = b.
void chol_backward(const std::vector<double>& l, std::size_t n,
                   std::span<const double> b, std::span<double> x);
// log det(L L') = 2 sum log diag(L).
double chol_logdet(const std::vector<double>& l, std::size_t n);

// G = X'X (n x n, full symmetric storage).
std::vector<double> gram_matrix(const Mat& x);
// G += v v' for full symmetric storage.
void gram_rank1_update(std::vector<double>& g, std::span<const double> v);

// ---------------------------------------------------------------------------
// Percentile
// ---------------------------------------------------------------------------

// Nearest-rank percentile: k-th smallest with k = ceil(delta/100 * n),
// clamped to [1, n]. delta in [0, 100]; values nonempty.
double percentile(std::span<const double> values, double delta);
// Same, but permutes the input in place (no allocation).
double percentile_inplace(std::span<double> values, double delta);

// ---------------------------------------------------------------------------
// Random variates
// ---------------------------------------------------------------------------

// n uniform draws from {0..n-1}, with replacement.
std::vector<std::uint32_t> sample_indices_with_replacement(RngStream& rng,
                                                           std::size_t n);
// Laplace(0, b) via inverse CDF; exactly one uniform per variate.
double sample_laplace(RngStream& rng, double b);
// Normal(0, sigma^2).
double sample_gaussian(RngStream& rng, double sigma);

}  // namespace bandit
