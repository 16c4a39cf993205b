#pragma once

// Cramer-Rao-like lower bound on the minimax tolerance from the Taylor
// coefficients of the log-fidelity between nearby states.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "pacmet/opcore.hpp"
#include "pacmet/probe.hpp"

namespace pacmet {

/// g(t, tau) = -1/2 log F(rho(t), rho(t + tau)).
using HalfLogFidelity = std::function<double(double t, double tau)>;

HalfLogFidelity half_log_fidelity(std::function<DensityMatrix(double)> state_at);
/// Covariant pure family, independent of t. Uses 1 - |S|^2 = 4 sum_w c(w)
/// sin^2(w tau/2) on the autocorrelation of a^2 to avoid cancellation.
HalfLogFidelity half_log_fidelity(const ProbeSpectrum& probe);

struct CrCoefficients {
  std::vector<double> t;               // sample points
  std::vector<std::vector<double>> f;  // f[i][k - 2] = f_k(t_i), k = 2..pmax
  double q = 0.0;
  std::pair<double, double> gamma_bracket;  // (guaranteed lower endpoint, sqrt(L))
};

struct CramerRaoReport {
  CrCoefficients coeffs;
  double gamma = 0.0;     // bracket lower endpoint
  double min_f2 = 0.0;
  double delta_lb = 0.0;  // gamma / sqrt(8 min f2), 0 when gamma <= 0
  bool negative_gamma = false;
  std::optional<double> gamma_exact;  // from the Lambert-W equality, when requested
  double r_est = 0.0;      // first tau with F <= 1e-8 over the samples (inf if none)
  bool beyond_radius = false;
};

struct CramerRaoOptions {
  int pmax = 5;
  /// Characteristic time scale for the difference steps. Zero picks
  /// 1/sqrt(8 f2) from a rough first pass.
  double scale = 0.0;
  double tau_max = 3.141592653589793;  // scan range for r_est
  bool exact_gamma = false;
};

/// k-th derivative of g(t, .) at tau = 0 by central differences with one
/// Richardson pass.
double log_fidelity_derivative(const HalfLogFidelity& g, double t, int k, double scale);

/// Throws DomainError unless eta_bar > 3/4 and pmax >= 4.
CramerRaoReport cramer_rao_like_bound(const HalfLogFidelity& g, const std::vector<double>& t_samples, double eta_bar,
                                      const CramerRaoOptions& opts = {});

/// gamma solving the equality case, sqrt(2) times
/// -(1/q)[1 + a q^2 + W_{-1}(-e^{-1 - a q^2})] with a = L/4.
double cramer_rao_gamma_exact(double q, double eta_bar);

}  // namespace pacmet
