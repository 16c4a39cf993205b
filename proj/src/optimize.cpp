#include "pacmet/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "barrier.hpp"

namespace pacmet {

PovmGrid::PovmGrid(std::vector<HermitianOperator> effects, std::vector<double> predictions)
    : effects_(std::move(effects)), predictions_(std::move(predictions)) {
  if (effects_.empty()) throw InvalidArgument("POVM needs at least one effect");
  if (effects_.size() != predictions_.size()) throw GridMismatch("effect and prediction counts differ");
  const int d = effects_.front().dim();
  CMatrix total = CMatrix::Zero(d, d);
  for (std::size_t l = 0; l < effects_.size(); ++l) {
    const auto& q = effects_[l];
    if (q.dim() != d) throw DimensionMismatch("POVM effects differ in dimension");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(q.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-8) {
      std::ostringstream os;
      os << "effect " << l << " has eigenvalue " << es.eigenvalues()(0);
      throw DomainError(os.str());
    }
    total += q.matrix();
  }
  const double err = operator_norm(HermitianOperator::from_hermitian_part(total - CMatrix::Identity(d, d)));
  if (err > 1e-7) {
    std::ostringstream os;
    os << "effects sum to identity only within " << err;
    throw DomainError(os.str());
  }
}

namespace {

void check_aligned(const StateFamily& fam, const PovmGrid& povm) {
  if (povm.size() != fam.size()) throw GridMismatch("POVM and family grids differ in size");
  if (povm.dim() != fam.dim()) throw DimensionMismatch("POVM and family dimensions differ");
}

detail::CoverLists cover_lists(const StateFamily& fam, int k) {
  const int N = fam.size();
  detail::CoverLists cover(N);
  for (int l = 0; l < N; ++l) {
    for (int m = 0; m < N; ++m) {
      const double w = fam.window_weight(k, l, m);
      if (w != 0.0) cover[l].emplace_back(m, w);
    }
  }
  return cover;
}

PovmGrid grid_povm(const StateFamily& fam, std::vector<HermitianOperator> effects) {
  return PovmGrid(std::move(effects), fam.grid());
}

}  // namespace

std::vector<double> acceptance_profile(const StateFamily& fam, const Window& w, const PovmGrid& povm) {
  check_aligned(fam, povm);
  const int N = fam.size();
  const int k = snap_window(w, fam.step()).k;
  std::vector<double> p(N, 0.0);
  for (int l = 0; l < N; ++l) {
    for (int m = 0; m < N; ++m) {
      const double wt = fam.window_weight(k, l, m);
      if (wt != 0.0) p[l] += wt * trace_product(fam.state(l), povm.effect(m));
    }
  }
  return p;
}

double success_probability(const StateFamily& fam, const Prior& prior, const Window& w, const PovmGrid& povm) {
  if (prior.size() != fam.size()) throw GridMismatch("prior and family grids differ");
  const std::vector<double> p = acceptance_profile(fam, w, povm);
  double eta = 0.0;
  for (int l = 0; l < fam.size(); ++l) eta += prior[l] * p[l];
  return eta;
}

double minimax_success_probability(const StateFamily& fam, const Window& w, const PovmGrid& povm) {
  const std::vector<double> p = acceptance_profile(fam, w, povm);
  return *std::min_element(p.begin(), p.end());
}

double interior_minimax_success_probability(const StateFamily& fam, const Window& w, const PovmGrid& povm) {
  const std::vector<double> p = acceptance_profile(fam, w, povm);
  if (fam.domain().periodic()) return *std::min_element(p.begin(), p.end());
  const int k = snap_window(w, fam.step()).k;
  double best = 1.0;
  bool any = false;
  for (int l = k; l + k <= fam.size() - 1; ++l) {
    best = any ? std::min(best, p[l]) : p[l];
    any = true;
  }
  if (!any) throw DomainError("no grid point has its window inside the domain");
  return best;
}

SdpSolution solve_bayesian_sdp(const StateFamily& fam, const Prior& prior, const Window& w, const SolverConfig& cfg) {
  const WindowStencil stencil = snap_window(w, fam.step());
  const std::vector<HermitianOperator> B = smear_family(fam, prior, w);
  LeastUpperBound lub = solve_least_upper_bound(B, cfg);
  SdpSolution sol;
  sol.eta_star = lub.primal;
  sol.povm = grid_povm(fam, std::move(lub.effects));
  sol.dual_X = lub.X;
  sol.duality_gap = lub.dual - lub.primal;
  sol.iterations = lub.iterations;
  sol.stencil = stencil;
  sol.history = std::move(lub.history);
  return sol;
}

MinimaxSolution solve_minimax_sdp(const StateFamily& fam, const Window& w, const SolverConfig& cfg) {
  const WindowStencil stencil = snap_window(w, fam.step());
  detail::JointBarrierResult jb = detail::solve_joint_barrier(fam.states(), cover_lists(fam, stencil.k), cfg);
  MinimaxSolution sol;
  sol.eta_bar_star = jb.primal;
  sol.povm = grid_povm(fam, std::move(jb.effects));
  sol.prior = Prior::tabulated(std::move(jb.mu));
  sol.dual_X = jb.X;
  sol.gap = jb.dual - jb.primal;
  sol.iterations = jb.iterations;
  sol.stencil = stencil;
  sol.acceptance = std::move(jb.acceptance);
  sol.history = std::move(jb.history);
  return sol;
}

double conditional_min_entropy_check(const SdpSolution& solution) {
  const double h = -std::log(solution.eta_star);
  const double dual = -std::log(solution.dual_X.trace());
  const double allowed = 1e-6 + std::max(0.0, solution.duality_gap) / solution.eta_star;
  if (std::abs(h - dual) > allowed) {
    std::ostringstream os;
    os << "-log eta* = " << h << " but -log Tr X = " << dual;
    throw DomainError(os.str());
  }
  return h;
}

int smallest_radius(const std::function<double(int)>& eta_of_k, int k_max, double eta_target) {
  if (eta_target <= 0.0) return 0;
  if (k_max < 1) throw InvalidArgument("k_max must be at least 1");
  if (eta_of_k(k_max) < eta_target) {
    std::ostringstream os;
    os << "target " << eta_target << " not reached at the largest radius";
    throw Unreachable(os.str());
  }
  int lo = 0, hi = k_max;  // eta(lo) < target <= eta(hi), with eta(0) treated as failing
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (eta_of_k(mid) >= eta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

ToleranceResult optimal_tolerance(const StateFamily& fam, Setting setting, double eta_target,
                                  const std::optional<Prior>& prior, const SolverConfig& cfg) {
  const double step = fam.step();
  const int k_max = fam.domain().periodic() ? fam.size() / 2 : fam.size();
  std::map<int, double> cache;
  auto eta_of_k = [&](int k) {
    if (auto it = cache.find(k); it != cache.end()) return it->second;
    const Window w{k * step};
    double eta;
    if (setting == Setting::kBayesian) {
      eta = solve_bayesian_sdp(fam, prior.value_or(Prior::uniform(fam.size())), w, cfg).eta_star;
    } else {
      eta = solve_minimax_sdp(fam, w, cfg).eta_bar_star;
    }
    cache[k] = eta;
    return eta;
  };
  const int k = smallest_radius(eta_of_k, k_max, eta_target);
  if (k == 0) return {0.0, 0, 0.0};
  return {k * step, k, eta_of_k(k)};
}

int sample_complexity(const StateFamily& fam, Setting setting, double eta_target, const Window& w, int n_max,
                      const std::optional<Prior>& prior, const SolverConfig& cfg) {
  double size = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    size *= fam.dim();
    if (size > 64.0) {
      std::ostringstream os;
      os << "explicit " << n << "-copy family has dimension " << size;
      throw SizeGuard(os.str());
    }
    const StateFamily fam_n = n == 1 ? fam : tensor_power_family(fam, n);
    const double eta = setting == Setting::kBayesian
                           ? solve_bayesian_sdp(fam_n, prior.value_or(Prior::uniform(fam.size())), w, cfg).eta_star
                           : solve_minimax_sdp(fam_n, w, cfg).eta_bar_star;
    if (eta >= eta_target) return n;
  }
  return kSampleComplexityInfinite;
}

double subdivision_bound(const StateFamily& fam, const Prior& prior, const Window& w, double t_sub,
                         const SolverConfig& cfg) {
  const WindowStencil stencil = snap_window(w, fam.step());
  if (t_sub < 2.0 * stencil.delta - 1e-12) throw InvalidArgument("sub-interval shorter than the window");
  const int N = fam.size();
  const int L = std::min(N, std::max(1, static_cast<int>(std::floor(t_sub / fam.step() + 1e-9))));

  std::map<std::vector<bool>, double> solved;
  auto value = [&](const std::vector<bool>& mask) {
    if (auto it = solved.find(mask); it != solved.end()) return it->second;
    double mass = 0.0;
    for (int l = 0; l < N; ++l) {
      if (mask[l]) mass += prior[l];
    }
    // Pieces without prior mass drop out of the convex decomposition.
    const double v = mass > 0.0 ? solve_bayesian_sdp(fam, prior.restricted(mask), w, cfg).eta_star : 0.0;
    solved[mask] = v;
    return v;
  };

  if (fam.domain().periodic()) {
    // Averaging the N cyclic shifts covers every point L times, so the prior
    // is a convex combination of its restrictions.
    double best = 0.0;
    for (int s = 0; s < N; ++s) {
      std::vector<bool> mask(N, false);
      for (int j = 0; j < L; ++j) mask[(s + j) % N] = true;
      best = std::max(best, value(mask));
    }
    return best;
  }
  // Bounded: each offset r gives a partition; any partition yields a bound.
  double best_partition = 1.0;
  for (int r = 0; r < L; ++r) {
    double worst_piece = 0.0;
    for (int start = r - L; start < N; start += L) {
      std::vector<bool> mask(N, false);
      bool any = false;
      for (int j = std::max(0, start); j < std::min(N, start + L); ++j) {
        mask[j] = true;
        any = true;
      }
      if (any) worst_piece = std::max(worst_piece, value(mask));
    }
    best_partition = std::min(best_partition, worst_piece);
  }
  return best_partition;
}

}  // namespace pacmet
