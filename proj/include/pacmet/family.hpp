#pragma once

// One-parameter state families on a uniform grid, priors, and the
// rectangular acceptance window.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pacmet/opcore.hpp"
#include "pacmet/probe.hpp"

namespace pacmet {

enum class DomainKind { kPeriodic, kBounded };

struct Domain {
  DomainKind kind = DomainKind::kPeriodic;
  double T = 0.0;  // period or interval length

  static Domain periodic(double T) { return {DomainKind::kPeriodic, T}; }
  static Domain bounded(double T) { return {DomainKind::kBounded, T}; }
  bool periodic() const { return kind == DomainKind::kPeriodic; }
};

/// Rectangular window w(x) = [|x| <= delta].
struct Window {
  double delta = 0.0;
};

/// Fourier transform sin(delta w)/(pi w) of the rectangular window.
double window_hat(const Window& w, double omega);
long double window_hat(long double delta, long double omega);

/// Window radius snapped down to k grid steps.
struct WindowStencil {
  int k = 0;
  double delta = 0.0;      // k * step
  double snapped_by = 0.0;  // requested - delta
};

/// Throws WindowTooCoarse if the radius is below one grid step.
WindowStencil snap_window(const Window& w, double step);

class StateFamily {
 public:
  StateFamily(Domain domain, std::vector<DensityMatrix> states, std::optional<double> lipschitz = std::nullopt);

  const Domain& domain() const { return domain_; }
  int size() const { return static_cast<int>(states_.size()); }
  int dim() const { return states_.front().dim(); }
  double step() const { return domain_.T / size(); }
  /// Periodic grids start at 0; bounded grids use cell midpoints.
  double time(int l) const;
  const std::vector<double>& grid() const { return grid_; }
  const DensityMatrix& state(int l) const { return states_[l]; }
  const std::vector<DensityMatrix>& states() const { return states_; }
  std::optional<double> lipschitz() const { return lipschitz_; }

  /// Overlap |cell_m intersect [t_l - k step, t_l + k step]| / step, which is
  /// 1 inside, 1/2 on the edge cells and 0 outside. Bounded domains truncate.
  double window_weight(int k, int l, int m) const;
  /// Grid distance in steps (circular on periodic domains).
  int index_distance(int l, int m) const;

 private:
  Domain domain_;
  std::vector<DensityMatrix> states_;
  std::vector<double> grid_;
  std::optional<double> lipschitz_;
};

enum class PriorKind { kUniform, kPointMass, kTabulated };

class Prior {
 public:
  Prior() : Prior(PriorKind::kUniform, {1.0}) {}
  Prior(PriorKind kind, std::vector<double> weights);

  static Prior uniform(int N);
  static Prior point_masses(int N, std::span<const int> indices, std::span<const double> weights);
  /// Normalizes nonnegative grid weights.
  static Prior tabulated(std::vector<double> weights);

  PriorKind kind() const { return kind_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double operator[](int l) const { return weights_[l]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Prior conditioned on a subset of grid points (renormalized). Throws
  /// DomainError if the subset has zero mass.
  Prior restricted(const std::vector<bool>& mask) const;

 private:
  PriorKind kind_;
  std::vector<double> weights_;
};

StateFamily build_family(Domain domain, int N, const std::function<DensityMatrix(double)>& state_at,
                         std::optional<double> lipschitz = std::nullopt);

/// psi(t) = sum_lambda psi_lambda e^{-i lambda t} |lambda>. Throws
/// PeriodMismatch if a periodic domain is not a period of the family.
StateFamily build_unitary_family(std::span<const double> h_eigenvalues, const CVector& psi, int N, Domain domain);
StateFamily build_unitary_family(std::span<const double> h_eigenvalues, const ProbeSpectrum& probe, int N,
                                 double period);

/// cos^2(w t/2)|+><+| + sin^2(w t/2)|-><-| in the computational basis.
DensityMatrix dephasing_state(double omega, double t);
StateFamily build_dephasing_family(double omega, int N, Domain domain);

/// Every state replaced by its n-fold tensor power.
StateFamily tensor_power_family(const StateFamily& fam, int n);

/// B_l = sum_m weight(l, m) mu_m rho_m.
std::vector<HermitianOperator> smear_family(const StateFamily& fam, const Prior& prior, const Window& w);

/// max over adjacent grid pairs of ||rho_{l+1} - rho_l||_1 / step.
double estimate_lipschitz(const StateFamily& fam);

struct LikelihoodTable {
  // likelihood[o][l] = Tr[rho_l M_o]
  std::vector<std::vector<double>> likelihood;
  std::vector<double> prior;
  std::vector<double> marginal;
  // posterior[o][l] = P(t_l | o); empty rows for outcomes with zero marginal
  std::vector<std::vector<double>> posterior;

  int outcomes() const { return static_cast<int>(likelihood.size()); }
  int grid_size() const { return static_cast<int>(prior.size()); }

  /// Builds marginals and posteriors. Throws DomainError if a column of the
  /// likelihood does not sum to 1 (1e-9).
  static LikelihoodTable from_likelihood(std::vector<std::vector<double>> likelihood, const Prior& prior);
};

LikelihoodTable make_likelihood_table(const StateFamily& fam, const Prior& prior,
                                      const std::vector<HermitianOperator>& measurement);

}  // namespace pacmet
