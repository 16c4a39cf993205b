#pragma once

// Joint log-det barrier for the minimax program
//   min Tr X  s.t.  X >= sum_i w_li mu_i rho_i  for all l,  mu in the simplex.

#include <utility>
#include <vector>

#include "pacmet/optimize.hpp"

namespace pacmet::detail {

/// For each effect l, the states i it covers with weight w_li. The weights
/// must be symmetric (w_li = w_il).
using CoverLists = std::vector<std::vector<std::pair<int, double>>>;

struct JointBarrierResult {
  HermitianOperator X;
  std::vector<HermitianOperator> effects;
  std::vector<double> mu;
  std::vector<double> acceptance;  // p_i = sum_l w_li Tr[rho_i Q_l]
  double primal = 0.0;             // min_i p_i
  double dual = 0.0;               // Tr X
  int iterations = 0;
  std::vector<DualityRecord> history;
};

JointBarrierResult solve_joint_barrier(const std::vector<DensityMatrix>& states, const CoverLists& cover,
                                       const SolverConfig& cfg);

/// Symmetric normalization S^{-1/2} Q_l S^{-1/2} with S = sum_l Q_l.
std::vector<HermitianOperator> normalize_effects(const std::vector<CMatrix>& raw);

}  // namespace pacmet::detail
