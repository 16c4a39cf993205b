#pragma once

// Discretized POVM optimization: Bayesian and minimax success probabilities,
// the barrier solvers, post-processing, tolerance and sample-complexity search.

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pacmet/family.hpp"
#include "pacmet/kernels.hpp"

namespace pacmet {

/// Effects Q_l attached to grid predictions t_l.
class PovmGrid {
 public:
  PovmGrid() = default;
  /// Validates PSD (1e-8) and completeness (1e-7 in operator norm).
  PovmGrid(std::vector<HermitianOperator> effects, std::vector<double> predictions);

  int size() const { return static_cast<int>(effects_.size()); }
  int dim() const { return effects_.front().dim(); }
  const HermitianOperator& effect(int l) const { return effects_[l]; }
  const std::vector<HermitianOperator>& effects() const { return effects_; }
  const std::vector<double>& predictions() const { return predictions_; }

 private:
  std::vector<HermitianOperator> effects_;
  std::vector<double> predictions_;
};

struct SolverConfig {
  double tol = 1e-6;
  double t0 = 1.0;
  double t_factor = 4.0;
  int max_newton = 50;
  int max_outer = 500;
  Exec exec = Exec::kParallel;
};

/// (primal, dual) objective pair recorded after each centering step.
struct DualityRecord {
  double primal;
  double dual;
};

/// Solution of min Tr X subject to X >= B_l for every l.
struct LeastUpperBound {
  HermitianOperator X;
  std::vector<HermitianOperator> effects;  // normalized barrier POVM
  double primal = 0.0;                     // sum_l Tr[Q_l B_l]
  double dual = 0.0;                       // Tr X
  int iterations = 0;                      // Newton steps
  std::vector<DualityRecord> history;
};

/// Throws SizeGuard if d^2 N > 5e6 and SolverDiverged if centering fails.
LeastUpperBound solve_least_upper_bound(const std::vector<HermitianOperator>& B, const SolverConfig& cfg = {});

struct SdpSolution {
  double eta_star = 0.0;  // primal value of the recovered POVM
  PovmGrid povm;
  HermitianOperator dual_X;
  double duality_gap = 0.0;
  int iterations = 0;
  WindowStencil stencil;
  std::vector<DualityRecord> history;
};

struct MinimaxSolution {
  double eta_bar_star = 0.0;  // min over grid points of the acceptance of povm
  PovmGrid povm;
  Prior prior;                // least-favorable prior
  HermitianOperator dual_X;
  double gap = 0.0;           // Tr X - eta_bar_star
  int iterations = 0;
  WindowStencil stencil;
  std::vector<double> acceptance;
  std::vector<DualityRecord> history;
};

/// Per-grid-point acceptance p_l = sum_m weight(l, m) Tr[rho_l Q_m].
std::vector<double> acceptance_profile(const StateFamily& fam, const Window& w, const PovmGrid& povm);
double success_probability(const StateFamily& fam, const Prior& prior, const Window& w, const PovmGrid& povm);
double minimax_success_probability(const StateFamily& fam, const Window& w, const PovmGrid& povm);

/// Minimum acceptance over grid points whose window fits inside a bounded
/// domain. Equals the global minimum on periodic domains.
double interior_minimax_success_probability(const StateFamily& fam, const Window& w, const PovmGrid& povm);

SdpSolution solve_bayesian_sdp(const StateFamily& fam, const Prior& prior, const Window& w,
                               const SolverConfig& cfg = {});
MinimaxSolution solve_minimax_sdp(const StateFamily& fam, const Window& w, const SolverConfig& cfg = {});

/// -log eta_star; throws DomainError if it differs from -log Tr X by more
/// than 1e-6 beyond the reported duality gap.
double conditional_min_entropy_check(const SdpSolution& solution);

struct PostprocessResult {
  std::vector<int> strategy;  // outcome -> grid index
  double eta = 0.0;
};

PostprocessResult smap_postprocess(const LikelihoodTable& table, const StateFamily& fam, const Window& w);
PostprocessResult smcl_postprocess(const LikelihoodTable& table, const StateFamily& fam, const Window& w);

/// Success probability sum_o sum_l mu_l Lambda(o|l) weight(l, strategy[o]).
double strategy_success_probability(const LikelihoodTable& table, const StateFamily& fam, const Window& w,
                                    const std::vector<int>& strategy);
/// Worst-case acceptance of a classical strategy over grid points.
double strategy_minimax_success_probability(const LikelihoodTable& table, const StateFamily& fam, const Window& w,
                                            const std::vector<int>& strategy);

enum class Setting { kBayesian, kMinimax };

/// Smallest number of grid steps k in [1, k_max] with eta(k) >= eta_target,
/// given a monotone oracle. Returns 0 when eta_target <= 0. Throws
/// Unreachable if eta(k_max) < eta_target.
int smallest_radius(const std::function<double(int)>& eta_of_k, int k_max, double eta_target);

struct ToleranceResult {
  double delta = 0.0;
  int k = 0;
  double eta = 0.0;  // value attained at delta
};

/// Smallest grid radius reaching eta_target, bisected over [1, N/2] steps.
ToleranceResult optimal_tolerance(const StateFamily& fam, Setting setting, double eta_target,
                                  const std::optional<Prior>& prior = std::nullopt, const SolverConfig& cfg = {});

inline constexpr int kSampleComplexityInfinite = std::numeric_limits<int>::max();

/// Smallest n with optimal success probability of the n-copy family at least
/// eta_target. Explicit tensor powers need dim^n <= 64 (SizeGuard otherwise).
/// Returns kSampleComplexityInfinite if n_max is not enough.
int sample_complexity(const StateFamily& fam, Setting setting, double eta_target, const Window& w, int n_max,
                      const std::optional<Prior>& prior = std::nullopt, const SolverConfig& cfg = {});

/// Largest optimal Bayesian value over priors restricted to grid-centered
/// windows of length t_sub.
double subdivision_bound(const StateFamily& fam, const Prior& prior, const Window& w, double t_sub,
                         const SolverConfig& cfg = {});

}  // namespace pacmet
