#pragma once

#include <vector>

namespace pacmet {

/// Nonnegative amplitudes |psi_lambda| over Hamiltonian eigenvalues 0..n.
/// Keeps an extended-precision copy for the closed-form error integrals.
class ProbeSpectrum {
 public:
  /// Validates nonnegativity and unit norm (1e-12).
  explicit ProbeSpectrum(std::vector<double> amps);

  /// Rescales to unit norm; entries must be nonnegative and not all zero.
  static ProbeSpectrum normalized(std::vector<double> amps);
  static ProbeSpectrum normalized(std::vector<long double> amps);

  int n() const { return static_cast<int>(amps_.size()) - 1; }
  const std::vector<double>& amps() const { return amps_; }
  const std::vector<long double>& precise() const { return precise_; }
  double operator[](int lambda) const { return amps_[lambda]; }

 private:
  ProbeSpectrum() = default;
  std::vector<double> amps_;
  std::vector<long double> precise_;
};

}  // namespace pacmet
