#pragma once

// Hot loops with a serial reference and an OpenMP variant. Both variants
// produce bit-identical results: parallel loops only write disjoint slots
// and every reduction is done serially afterwards.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pacmet/opcore.hpp"

namespace pacmet {

enum class Exec { kSerial, kParallel };

/// Caps OpenMP threads from PACMET_THREADS if set. Returns the cap in effect.
int apply_thread_cap_from_env();

/// Real coordinates of a Hermitian matrix in an orthonormal basis:
/// diagonal entries, then sqrt(2) Re and sqrt(2) Im of each (i<j) entry.
Eigen::VectorXd hermitian_coords(const CMatrix& m);
CMatrix from_hermitian_coords(const Eigen::VectorXd& x, int dim);

/// H_ab = sum_l Tr[E_a A_l E_b A_l] for Hermitian A_l.
Eigen::MatrixXd barrier_hessian(const std::vector<CMatrix>& inverses, Exec exec);

struct PdInverseBatch {
  std::vector<CMatrix> inverses;
  std::vector<double> logdets;
  bool positive = true;  // false if some slack failed its Cholesky factorization
};

/// Inverts each Hermitian slack matrix through a Cholesky factorization.
PdInverseBatch invert_positive_definite(const std::vector<CMatrix>& slacks, Exec exec);

/// c(w) = sum_lambda a_lambda a_{lambda+w} for w = 0..n.
std::vector<long double> autocorrelation(std::span<const long double> amps, Exec exec);

/// Integral over [lo, hi] of |sum_lambda a_lambda e^{i lambda t}|^2 by
/// composite 20-point Gauss-Legendre on `panels` equal panels.
long double arc_power_integral(std::span<const long double> amps, long double lo, long double hi, int panels,
                               Exec exec);

struct PairScanResult {
  bool found = false;
  double value = 0.0;
  int l = -1;
  int m = -1;
};

/// Minimum of value(l, m) over pairs l < m with valid(l, m). Ties resolve to
/// the lexicographically smallest pair.
PairScanResult pair_scan_min(int N, const std::function<bool(int, int)>& valid,
                             const std::function<double(int, int)>& value, Exec exec);

}  // namespace pacmet
