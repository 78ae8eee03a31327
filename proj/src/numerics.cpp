#include "bandit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "bandit/kernels.hpp"

namespace bandit {

void Mat::append_row(std::span<const double> r) {
  detail::require(cols_ > 0 && r.size() == cols_,
                  "Mat::append_row: column count mismatch");
  data_.insert(data_.end(), r.begin(), r.end());
  ++rows_;
}

// ---------------------------------------------------------------------------
// QR with column pivoting + complete orthogonal decomposition
// ---------------------------------------------------------------------------

void QrFactor::load(const Mat& x) {
  m_ = x.rows();
  n_ = x.cols();
  detail::require(m_ >= n_ && n_ > 0,
                  "least_squares: X must have rows >= cols >= 1");
  a_.resize(m_ * n_);
  for (std::size_t i = 0; i < m_; ++i) {
    const double* r = x.row(i);
    for (std::size_t j = 0; j < n_; ++j) a_[j * m_ + i] = r[j];
  }
  factor();
}

void QrFactor::load_rows(const Mat& x, std::span<const std::uint32_t> idx) {
  m_ = idx.size();
  n_ = x.cols();
  detail::require(m_ >= n_ && n_ > 0,
                  "least_squares: X must have rows >= cols >= 1");
  a_.resize(m_ * n_);
  for (std::size_t i = 0; i < m_; ++i) {
    const double* r = x.row(idx[i]);
    for (std::size_t j = 0; j < n_; ++j) a_[j * m_ + i] = r[j];
  }
  factor();
}

void QrFactor::factor() {
  const std::size_t m = m_, n = n_;
  tau_.assign(n, 0.0);
  jpvt_.resize(n);
  for (std::size_t j = 0; j < n; ++j) jpvt_[j] = static_cast<int>(j);

  norm2_.resize(n);
  orig2_.resize(n);
  std::vector<double>&norm2 = norm2_, &orig2 = orig2_;
  for (std::size_t j = 0; j < n; ++j) {
    const double* col = a_.data() + j * m;
    norm2[j] = kern::dot(col, col, m);
    orig2[j] = norm2[j];
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t j = k + 1; j < n; ++j)
      if (norm2[j] > norm2[pivot]) pivot = j;
    if (pivot != k) {
      double* ck = a_.data() + k * m;
      double* cp = a_.data() + pivot * m;
      std::swap_ranges(ck, ck + m, cp);
      std::swap(norm2[k], norm2[pivot]);
      std::swap(orig2[k], orig2[pivot]);
      std::swap(jpvt_[k], jpvt_[pivot]);
    }

    double* col = a_.data() + k * m;
    const std::size_t len = m - k;
    const double sigma = std::sqrt(kern::dot(col + k, col + k, len));
    if (sigma == 0.0) {
      tau_[k] = 0.0;
      continue;
    }
    const double alpha = col[k];
    const double beta = -std::copysign(sigma, alpha);
    tau_[k] = (beta - alpha) / beta;
    const double inv = 1.0 / (alpha - beta);
    for (std::size_t i = k + 1; i < m; ++i) col[i] *= inv;
    col[k] = beta;

    for (std::size_t j = k + 1; j < n; ++j) {
      double* cj = a_.data() + j * m;
      double w = cj[k];
      if (len > 1) w += kern::dot(col + k + 1, cj + k + 1, len - 1);
      w *= tau_[k];
      cj[k] -= w;
      if (len > 1) kern::axpy(-w, col + k + 1, cj + k + 1, len - 1);
      // Downdate the remaining column norm; rebuild when cancellation bites.
      double t = norm2[j] - cj[k] * cj[k];
      if (t < 1e-10 * orig2[j]) {
        t = (len > 1) ? kern::dot(cj + k + 1, cj + k + 1, len - 1) : 0.0;
      }
      norm2[j] = t;
    }
  }

  const double r00 = std::abs(a_[0]);
  const double tol = static_cast<double>(std::max(m, n)) *
                     std::numeric_limits<double>::epsilon() * r00;
  rank_ = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(a_[k * m + k]) > tol)
      rank_ = k + 1;
    else
      break;
  }

  if (rank_ > 0 && rank_ < n) {
    // Annihilate R12 with Householder reflections from the right, giving a
    // complete orthogonal decomposition for minimum-norm solves.
    const std::size_t r = rank_;
    ztau_.assign(r, 0.0);
    for (std::size_t i = r; i-- > 0;) {
      double tail2 = 0.0;
      for (std::size_t j = r; j < n; ++j) {
        const double v = a_[j * m + i];
        tail2 += v * v;
      }
      const double alpha = a_[i * m + i];
      const double sigma = std::sqrt(alpha * alpha + tail2);
      if (sigma == 0.0) continue;
      const double beta = -std::copysign(sigma, alpha);
      ztau_[i] = (beta - alpha) / beta;
      const double inv = 1.0 / (alpha - beta);
      for (std::size_t j = r; j < n; ++j) a_[j * m + i] *= inv;
      a_[i * m + i] = beta;
      for (std::size_t p = 0; p < i; ++p) {
        double w = a_[i * m + p];
        for (std::size_t j = r; j < n; ++j) w += a_[j * m + p] * a_[j * m + i];
        w *= ztau_[i];
        a_[i * m + p] -= w;
        for (std::size_t j = r; j < n; ++j) a_[j * m + p] -= w * a_[j * m + i];
      }
    }
  }
}

void QrFactor::solve(std::span<const double> y, Vec& beta) {
  detail::require(y.size() == m_, "QrFactor::solve: length mismatch");
  const std::size_t m = m_, n = n_, r = rank_;
  beta.assign(n, 0.0);
  if (r == 0) return;

  // qty = Q' y, reflectors 0..r-1 (later ones do not touch rows < r).
  Vec& qty = qty_;
  qty.assign(y.begin(), y.end());
  for (std::size_t k = 0; k < r; ++k) {
    if (tau_[k] == 0.0) continue;
    const double* col = a_.data() + k * m;
    const std::size_t len = m - k;
    double w = qty[k];
    if (len > 1) w += kern::dot(col + k + 1, qty.data() + k + 1, len - 1);
    w *= tau_[k];
    qty[k] -= w;
    if (len > 1) kern::axpy(-w, col + k + 1, qty.data() + k + 1, len - 1);
  }

  // Back-substitute the leading r x r triangle (R when full rank, T after
  // the right-reflector sweep otherwise).
  Vec& u = u_;
  u.assign(n, 0.0);
  for (std::size_t i = r; i-- > 0;) {
    double s = qty[i];
    for (std::size_t j = i + 1; j < r; ++j) s -= a_[j * m + i] * u[j];
    u[i] = s / a_[i * m + i];
  }

  if (r < n) {
    // u := Z' u, applying reflectors in ascending row order.
    for (std::size_t i = 0; i < r; ++i) {
      if (ztau_[i] == 0.0) continue;
      double w = u[i];
      for (std::size_t j = rank_; j < n; ++j) w += a_[j * m + i] * u[j];
      w *= ztau_[i];
      u[i] -= w;
      for (std::size_t j = rank_; j < n; ++j) u[j] -= w * a_[j * m + i];
    }
  }

  for (std::size_t k = 0; k < n; ++k) beta[jpvt_[k]] = u[k];
}

Vec least_squares(const Mat& x, const Vec& y) {
  detail::require(y.size() == x.rows(), "least_squares: y length != X rows");
  Vec beta;
  QrFactor::of(x).solve(y, beta);
  return beta;
}

// ---------------------------------------------------------------------------
// Cholesky / Gram
// ---------------------------------------------------------------------------

bool cholesky_in_place(std::vector<double>& a, std::size_t n) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::abs(a[i * n + i]));
  const double tol =
      std::max(static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                   max_diag,
               0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      if (j > 0) s -= kern::dot(a.data() + i * n, a.data() + j * n, j);
      if (j < i) {
        a[i * n + j] = s / a[j * n + j];
      } else {
        if (s <= tol) return false;
        a[i * n + i] = std::sqrt(s);
      }
    }
  }
  return true;
}

void chol_forward(const std::vector<double>& l, std::size_t n,
                  std::span<const double> b, std::span<double> x) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    if (i > 0) s -= kern::dot(l.data() + i * n, x.data(), i);
    x[i] = s / l[i * n + i];
  }
}

void chol_backward(const std::vector<double>& l, std::size_t n,
                   std::span<const double> b, std::span<double> x) {
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= l[j * n + i] * x[j];
    x[i] = s / l[i * n + i];
  }
}

void chol_solve(const std::vector<double>& l, std::size_t n,
                std::span<const double> b, std::span<double> x) {
  chol_forward(l, n, b, x);
  chol_backward(l, n, x, x);
}

double chol_logdet(const std::vector<double>& l, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::log(l[i * n + i]);
  return 2.0 * s;
}

std::vector<double> gram_matrix(const Mat& x) {
  const std::size_t n = x.cols();
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) gram_rank1_update(g, {x.row(i), n});
  return g;
}

void gram_rank1_update(std::vector<double>& g, std::span<const double> v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i)
    kern::axpy(v[i], v.data(), g.data() + i * n, n);
}

Vec ridge_solve(const Mat& x, const Vec& y, double lambda) {
  detail::require(lambda >= 0.0, "ridge_solve: lambda must be >= 0");
  detail::require(y.size() == x.rows(), "ridge_solve: y length != X rows");
  detail::require(x.cols() > 0 && x.rows() > 0, "ridge_solve: empty system");
  const std::size_t n = x.cols();
  std::vector<double> v = gram_matrix(x);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] += lambda;
  if (!cholesky_in_place(v, n)) {
    if (lambda == 0.0) return least_squares(x, y);
    throw std::runtime_error("ridge_solve: X'X + lambda I not positive definite");
  }
  Vec xty(n, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    kern::axpy(y[i], x.row(i), xty.data(), n);
  Vec beta(n, 0.0);
  chol_solve(v, n, xty, beta);
  return beta;
}

// ---------------------------------------------------------------------------
// Percentile
// ---------------------------------------------------------------------------

double percentile_inplace(std::span<double> values, double delta) {
  detail::require(!values.empty(), "percentile: empty input");
  detail::require(delta >= 0.0 && delta <= 100.0,
                  "percentile: delta outside [0, 100]");
  const auto n = static_cast<double>(values.size());
  auto k = static_cast<std::ptrdiff_t>(std::ceil(delta * n / 100.0));
  k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(values.size()));
  std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
  return values[static_cast<std::size_t>(k - 1)];
}

double percentile(std::span<const double> values, double delta) {
  std::vector<double> buf(values.begin(), values.end());
  return percentile_inplace(buf, delta);
}

// ---------------------------------------------------------------------------
// Random variates
// ---------------------------------------------------------------------------

std::vector<std::uint32_t> sample_indices_with_replacement(RngStream& rng,
                                                           std::size_t n) {
  detail::require(n >= 1, "sample_indices_with_replacement: n must be >= 1");
  std::vector<std::uint32_t> idx(n);
  const auto bound = static_cast<std::uint32_t>(n);
  for (auto& v : idx) v = rng.uniform_index(bound);
  return idx;
}

double sample_laplace(RngStream& rng, double b) {
  detail::require(b > 0.0, "sample_laplace: scale must be positive");
  const double u = rng.uniform01();
  return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
}

double sample_gaussian(RngStream& rng, double sigma) {
  detail::require(sigma > 0.0, "sample_gaussian: sigma must be positive");
  return sigma * rng.standard_normal();
}

}  // namespace bandit
