#pragma once

#include <stdexcept>
#include <vector>

#include "bandit/arms.hpp"

namespace bandit {

// Balanced two-level initialization design whose model matrix (intercept,
// mains, two-way interactions) has full column rank.
struct InitialDesign {
  std::size_t k = 0;
  std::vector<Arm> runs;
  Mat model_matrix;  // runs x agent_feature_count(k)
};

struct DesignValidation {
  std::vector<double> column_balance;  // per non-intercept model column sum
  double max_main_offdiag = 0.0;       // main-effect Gram, off-diagonal max
  std::size_t rank = 0;
  std::size_t columns = 0;
  bool balanced = false;
  bool orthogonal_mains = false;
  bool full_rank = false;
  bool pass() const { return balanced && orthogonal_mains && full_rank; }
};

class DesignSearchError : public std::runtime_error {
 public:
  DesignSearchError(const std::string& msg, std::size_t best_rank,
                    std::size_t wanted)
      : std::runtime_error(msg), best_rank(best_rank), wanted_rank(wanted) {}
  std::size_t best_rank;
  std::size_t wanted_rank;
};

// Hadamard matrix of the given order, normalized so the first row and
// column are all +1. Supported orders: 1, 2, and 4m reachable as
// 2^a * (q + 1) with q prime, q = 3 (mod 4) (Paley I plus doubling).
Mat hadamard_matrix(std::size_t n);

// Randomized search: sign-flipped, row-permuted column selections from a
// Hadamard-derived strength-2 array, accepted on full model-matrix rank.
// Regular (character-structured) bases alias two-way interactions, so
// Paley bases are preferred over Sylvester when both exist.
InitialDesign generate_initial_design(std::size_t k, std::size_t n_runs,
                                      RngStream& rng);

DesignValidation validate_design(const InitialDesign& d);

}  // namespace bandit
