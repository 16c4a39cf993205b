#pragma once

// Hypothesis-testing reductions: Helstrom, two-point and fidelity bounds,
// Chernoff rates, asymmetric testing, sample-complexity and small-eta
// tolerance bounds, and single-use probe optimization.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pacmet/optimize.hpp"
#include "pacmet/probe.hpp"

namespace pacmet {

struct TwoPointInstance {
  DensityMatrix rho;
  DensityMatrix sigma;
  double p = 0.5;  // weight of rho
};

/// 1/2 + 1/2 ||p rho - (1-p) sigma||_1.
double helstrom(const TwoPointInstance& instance);

/// min over p of the Helstrom value (the binary minimax value) and the
/// minimizing p.
std::pair<double, double> minimax_binary_value(const DensityMatrix& rho, const DensityMatrix& sigma);

/// A bound value with the witness pair (t, t') that attains it.
struct BoundReport {
  std::string name;
  double value = 0.0;
  double t = std::numeric_limits<double>::quiet_NaN();
  double t_prime = std::numeric_limits<double>::quiet_NaN();
};

/// Grid pairs count as separated by more than 2 delta when their index
/// distance is at least 2k for the snapped radius k steps. All pair scans
/// throw NoValidPair when no such pair exists.

/// Upper bound on the minimax success probability.
BoundReport two_point_upper_bound(const StateFamily& fam, const Window& w, Exec exec = Exec::kParallel);
/// Lower bound 1/4 max F^2 on the minimax error probability.
BoundReport fidelity_error_lower_bound(const StateFamily& fam, const Window& w, Exec exec = Exec::kParallel);
/// Upper bound min C(rho(t), rho(t')) on the asymptotic error rate.
BoundReport chernoff_rate_bound(const StateFamily& fam, const Window& w, Exec exec = Exec::kParallel);
/// Lower bound log(1/(4(1-eta))) / (-2 log max F) on the minimax sample
/// complexity. Returns 0 for eta <= 3/4.
BoundReport two_point_sample_complexity_bound(const StateFamily& fam, const Window& w, double eta,
                                              Exec exec = Exec::kParallel);

/// Covariant versions: the pair family is psi(0), psi(tau) with tau >= 2 delta.
/// |<psi(0)|psi(tau)>| = |sum_lambda a_lambda^2 e^{-i lambda tau}|.
double covariant_overlap(const ProbeSpectrum& probe, double tau);
BoundReport covariant_two_point_upper_bound(const ProbeSpectrum& probe, double delta);
BoundReport covariant_fidelity_error_lower_bound(const ProbeSpectrum& probe, double delta);
BoundReport covariant_chernoff_rate_bound(const ProbeSpectrum& probe, double delta);

struct Shift {
  double weight;  // lambda_k
  int offset;     // s_k in grid steps
};

/// Multi-hypothesis upper bound on the Bayesian success probability: sum over
/// grid points t of the optimal success probability for {lambda_k mu(t+s_k)
/// rho(t+s_k)}. Throws ShiftOverlap unless every pair of offsets is at least
/// 2k steps apart; bounded domains treat shifted points outside the grid as
/// having zero prior mass.
double multishift_ht_bound(const StateFamily& fam, const Prior& prior, const Window& w,
                           const std::vector<Shift>& shifts, const SolverConfig& cfg = {});

/// inf { Tr[M sigma] : 0 <= M <= I, Tr[M rho] >= eta }.
double beta_h(const DensityMatrix& rho, const DensityMatrix& sigma, double eta);

/// 1/2 sum_l step beta_h(rho_l, sigma, eta).
double ht_tolerance_lower_bound(const StateFamily& fam, double eta, const DensityMatrix& sigma);

struct RenyiAsymptote {
  double value = 0.0;
  double information = 0.0;  // min over grid points of D_alpha''/alpha
  bool vacuous = false;      // set when some rho(t + tau) lacks the support of rho(t)
};

/// 1/2 eta^{alpha/(alpha-1)} sqrt(2 pi / (alpha n I_alpha)) for n copies of
/// the family. `state_at` gives rho at arbitrary t for the finite differences.
RenyiAsymptote renyi_tolerance_asymptote(const std::function<DensityMatrix(double)>& state_at,
                                         const std::vector<double>& t_samples, double eta, double alpha, int n);
RenyiAsymptote renyi_tolerance_asymptote(const StateFamily& fam, const std::function<DensityMatrix(double)>& state_at,
                                         double eta, double alpha, int n);

/// (eta/2) / a with a = sum_l mu_l Tr[rho_l Q_l] / step. Throws
/// ZeroDiagonalAcceptance if a vanishes.
double small_eta_tolerance(const StateFamily& fam, const Prior& prior, const PovmGrid& povm, double eta);
/// As above with a = min_l Tr[rho_l Q_l] / step.
double small_eta_tolerance_minimax(const StateFamily& fam, const PovmGrid& povm, double eta);

struct ProbeOptimization {
  CVector probe;  // unit vector
  double eta = 0.0;
};

/// Kraus operators of the channel at each grid point.
using KrausFamily = std::vector<std::vector<CMatrix>>;

/// Best single-use probe for a fixed POVM: top eigenvector of
/// M = sum_l mu_l N_l^dagger[(w * Q)_l]. Throws KrausIncomplete if
/// sum K^dagger K differs from I by more than 1e-9 at some grid point.
ProbeOptimization probe_optimization_single_use(const KrausFamily& channels, Domain domain, const Prior& prior,
                                                const Window& w, const PovmGrid& povm);
/// Upper bound min_l ||N_l^dagger[(w * Q)_l]||_inf on the minimax value over
/// probes, with the top eigenvector at the minimizing grid point.
ProbeOptimization probe_optimization_single_use_minimax(const KrausFamily& channels, Domain domain, const Window& w,
                                                        const PovmGrid& povm);

}  // namespace pacmet
