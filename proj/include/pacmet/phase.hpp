#pragma once

// Covariant phase estimation with H = diag(0, 1, ..., n) on the period 2 pi.

#include <functional>
#include <string>
#include <vector>

#include "pacmet/optimize.hpp"
#include "pacmet/probe.hpp"

namespace pacmet {

ProbeSpectrum probe_ghz(int n);
ProbeSpectrum probe_plus_tensor(int n);
ProbeSpectrum probe_hb(int n);
/// psi_lambda ~ exp(-(delta/(n+1)) (lambda - n/2)^2).
ProbeSpectrum probe_gaussian(int n, double delta);

/// Names accepted: ghz, plus, hb, gauss, opt, bessel.
ProbeSpectrum probe_by_name(const std::string& name, int n, double delta);
bool is_probe_name(const std::string& name);

/// sum_{lambda, lambda'} a_lambda a_lambda' w_hat(lambda - lambda'). Throws
/// DeltaOutOfRange unless 0 < delta < pi.
double covariant_success_probability(const ProbeSpectrum& probe, double delta);

/// 1 - eta computed directly as (1/pi) int_delta^pi |sum a_lambda e^{i lambda t}|^2 dt.
long double covariant_error_probability(const ProbeSpectrum& probe, double delta, Exec exec = Exec::kParallel);

/// Reference evaluation of the quadratic form on the prolate matrix.
double covariant_success_probability_reference(const ProbeSpectrum& probe, double delta);

/// W_{ab} = w_hat(a - b), a, b = 0..n.
Eigen::MatrixXd prolate_matrix(int n, double delta);

struct SlepianTridiagonal {
  std::vector<long double> diag;     // (n/2 - lambda)^2 cos(delta)
  std::vector<long double> offdiag;  // (lambda + 1)(n - lambda)/2
};
SlepianTridiagonal slepian_tridiagonal(int n, double delta);

struct OptimalProbe {
  ProbeSpectrum probe;
  double eta_star = 0.0;
  long double one_minus_eta = 0.0L;
};

/// Top eigenvector of the Slepian tridiagonal matrix by Sturm bisection and
/// inverse iteration. Throws DeltaOutOfRange unless 0 < delta < pi/2 and
/// PositivityViolation if the normalized vector has a negative entry.
OptimalProbe optimal_probe(int n, double delta);

/// Top eigenvector of the dense prolate matrix (sign fixed to positive sum).
Eigen::VectorXd prolate_top_eigenvector(int n, double delta);

ProbeSpectrum dpss_bessel_approx(int n, double delta);

/// Smallest delta in (0, pi) with eta(delta) >= eta_target, to 1e-12.
/// Throws Unreachable if eta_target >= 1.
double covariant_tolerance(const ProbeSpectrum& probe, double eta_target);

/// Smallest delta in (0, pi/2) at which the optimal probe for that delta
/// reaches eta_target, to 1e-12. Throws Unreachable otherwise.
double optimal_covariant_tolerance(int n, double eta_target);

double parallel_rate_theory(double delta);
double iid_rate_theory(double delta);
double gaussian_rate_theory(double delta);

/// Points with 1 - eta below this are dropped from rate fits.
inline constexpr long double kRateFloor = 1e-26L;

struct RateReport {
  std::string probe_name;
  double delta = 0.0;
  std::vector<int> n_list;
  std::vector<double> eta_list;
  std::vector<long double> one_minus_eta;
  int points_used = 0;  // points in the fitted tail
  double fitted_rate = 0.0;
  double theory_rate = 0.0;
};

/// Slope of -log(1 - eta) against n over the last half of the usable points.
/// Throws Saturated if fewer than two points remain above kRateFloor.
RateReport empirical_rate(const std::string& probe_name, const std::function<ProbeSpectrum(int)>& probe_family,
                          double delta, const std::vector<int>& n_list, double theory_rate);

/// Gridized covariant family on the support of the probe (period 2 pi).
StateFamily covariant_family(const ProbeSpectrum& probe, int N);

/// Q_l = (1/N)|chi_l><chi_l| with chi_l(lambda) = e^{-i lambda t_l} on the
/// probe support. Requires N > n.
PovmGrid pgm_grid_povm(const ProbeSpectrum& probe, int N);

/// alpha/(n+1) with alpha = 2 log(2/(pi (1 - eta))).
double gaussian_tolerance_asymptote(double eta_bar, int n);

/// Smallest n in [1, n_max] with closed-form eta >= eta_target, or
/// kSampleComplexityInfinite.
int covariant_sample_complexity(const std::function<ProbeSpectrum(int)>& probe_family, double delta,
                                double eta_target, int n_max);

}  // namespace pacmet
