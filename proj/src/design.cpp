#include "bandit/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bandit {

namespace {

bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Legendre symbol table for prime q: chi[a] in {-1, 0, +1}.
std::vector<int> quadratic_character(std::size_t q) {
  std::vector<int> chi(q, -1);
  chi[0] = 0;
  for (std::size_t a = 1; a < q; ++a) chi[(a * a) % q] = 1;
  return chi;
}

Mat paley_hadamard(std::size_t q) {
  const std::size_t n = q + 1;
  const std::vector<int> chi = quadratic_character(q);
  Mat h(n, n);
  h(0, 0) = 1.0;
  for (std::size_t j = 1; j < n; ++j) h(0, j) = 1.0;
  for (std::size_t i = 1; i < n; ++i) h(i, 0) = -1.0;
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 1; j < n; ++j)
      h(i, j) = (i == j) ? 1.0 : chi[(j - 1 + q - (i - 1)) % q];
  // Flip rows so column 0 is all +1 (row 0 already is).
  for (std::size_t i = 1; i < n; ++i)
    if (h(i, 0) < 0)
      for (std::size_t j = 0; j < n; ++j) h(i, j) = -h(i, j);
  return h;
}

Mat sylvester_double(const Mat& h) {
  const std::size_t n = h.rows();
  Mat out(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = h(i, j);
      out(i, j + n) = h(i, j);
      out(i + n, j) = h(i, j);
      out(i + n, j + n) = -h(i, j);
    }
  return out;
}

}  // namespace

Mat hadamard_matrix(std::size_t n) {
  if (n == 1) {
    Mat h(1, 1);
    h(0, 0) = 1.0;
    return h;
  }
  if (n == 2) {
    Mat h(2, 2, 1.0);
    h(1, 1) = -1.0;
    return h;
  }
  detail::require(n % 4 == 0, "hadamard_matrix: order must be 1, 2 or 4m");
  // Prefer the largest Paley base (fewest doublings): Paley matrices carry
  // no character structure, which the design search needs.
  std::size_t base = n;
  std::size_t doublings = 0;
  while (base > 2) {
    if (base % 4 == 0 && is_prime(base - 1) && (base - 1) % 4 == 3) break;
    if (base % 2 != 0) break;
    base /= 2;
    ++doublings;
  }
  Mat h;
  if (base > 2 && base % 4 == 0 && is_prime(base - 1) && (base - 1) % 4 == 3) {
    h = paley_hadamard(base - 1);
  } else if (base == 1 || base == 2) {
    h = hadamard_matrix(base);
  } else {
    throw ContractViolation(
        "hadamard_matrix: unsupported order " + std::to_string(n) +
        " (supported: 2^a * (q+1), q prime = 3 mod 4, plus powers of two)");
  }
  for (std::size_t d = 0; d < doublings; ++d) h = sylvester_double(h);
  return h;
}

InitialDesign generate_initial_design(std::size_t k, std::size_t n_runs,
                                      RngStream& rng) {
  detail::require(k >= 1 && k <= 20, "generate_initial_design: K in [1, 20]");
  const std::size_t model_cols = agent_feature_count(k);
  detail::require(n_runs >= model_cols,
                  "generate_initial_design: n_runs below model column count");
  detail::require(n_runs % 4 == 0 || n_runs == 1 || n_runs == 2,
                  "generate_initial_design: n_runs must be a multiple of 4");
  detail::require(n_runs - 1 >= k,
                  "generate_initial_design: not enough base columns for K");

  const Mat h = hadamard_matrix(n_runs);
  constexpr std::size_t kBudget = 10000;
  std::size_t best_rank = 0;

  std::vector<std::uint32_t> cols(n_runs - 1);
  std::vector<std::uint32_t> rows(n_runs);
  InitialDesign d;
  d.k = k;

  for (std::size_t attempt = 0; attempt < kBudget; ++attempt) {
    // Pick K distinct non-intercept columns (partial Fisher-Yates).
    for (std::size_t j = 0; j < cols.size(); ++j)
      cols[j] = static_cast<std::uint32_t>(j + 1);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t pick =
          j + rng.uniform_index(static_cast<std::uint32_t>(cols.size() - j));
      std::swap(cols[j], cols[pick]);
    }
    std::uint64_t signs = rng.next_u64();
    for (std::size_t i = 0; i < n_runs; ++i)
      rows[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i + 1 < n_runs; ++i) {
      const std::size_t pick =
          i + rng.uniform_index(static_cast<std::uint32_t>(n_runs - i));
      std::swap(rows[i], rows[pick]);
    }

    std::vector<Arm> runs(n_runs);
    Mat model(n_runs, model_cols);
    for (std::size_t i = 0; i < n_runs; ++i) {
      Arm& arm = runs[i];
      arm.levels.resize(k);
      for (std::size_t j = 0; j < k; ++j) {
        const double flip = ((signs >> j) & 1u) ? -1.0 : 1.0;
        arm.levels[j] =
            static_cast<std::int8_t>(h(rows[i], cols[j]) * flip > 0 ? 1 : -1);
      }
      expand_agent_features(arm, {model.row(i), model_cols});
    }

    const std::size_t rank = QrFactor::of(model).rank();
    best_rank = std::max(best_rank, rank);
    if (rank == model_cols) {
      d.runs = std::move(runs);
      d.model_matrix = std::move(model);
      return d;
    }
  }

  throw DesignSearchError(
      "generate_initial_design: no full-rank design in " +
          std::to_string(kBudget) + " candidates (best rank " +
          std::to_string(best_rank) + " of " + std::to_string(model_cols) + ")",
      best_rank, model_cols);
}

DesignValidation validate_design(const InitialDesign& d) {
  DesignValidation v;
  const Mat& m = d.model_matrix;
  const std::size_t k = d.k;
  v.columns = m.cols();
  v.column_balance.resize(m.cols() > 0 ? m.cols() - 1 : 0, 0.0);
  for (std::size_t j = 1; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j);
    v.column_balance[j - 1] = s;
  }
  v.balanced = std::all_of(v.column_balance.begin(), v.column_balance.end(),
                           [](double s) { return s == 0.0; });
  v.max_main_offdiag = 0.0;
  for (std::size_t a = 1; a <= k; ++a)
    for (std::size_t b = a + 1; b <= k; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) dot += m(i, a) * m(i, b);
      v.max_main_offdiag = std::max(v.max_main_offdiag, std::abs(dot));
    }
  v.orthogonal_mains = v.max_main_offdiag == 0.0;
  v.rank = (m.rows() >= m.cols() && m.cols() > 0) ? QrFactor::of(m).rank() : 0;
  v.full_rank = v.rank == m.cols();
  return v;
}

}  // namespace bandit
