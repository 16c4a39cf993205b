#pragma once

// Dense complex Hermitian linear algebra plus the divergences and distances
// used by the rest of the library.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pacmet/errors.hpp"

namespace pacmet {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDensityPsdTol = 1e-10;
inline constexpr double kDensityTraceTol = 1e-10;
inline constexpr double kPseudoInverseCutoff = 1e-10;

/// Square complex matrix known to be Hermitian.
class HermitianOperator {
 public:
  HermitianOperator() : m_(CMatrix::Zero(1, 1)) {}

  /// Validates Hermiticity entrywise to `tol` and stores the exact Hermitian
  /// part. Throws NonHermitian otherwise.
  explicit HermitianOperator(const CMatrix& m, double tol = kHermitianTol);

  /// Stores (m + m^dagger)/2 without validation. For results of operations
  /// that are Hermitian in exact arithmetic.
  static HermitianOperator from_hermitian_part(const CMatrix& m);

  static HermitianOperator identity(int dim);
  static HermitianOperator zero(int dim);
  static HermitianOperator diagonal(std::span<const double> diag);
  /// |v><v| (not normalized).
  static HermitianOperator projector(const CVector& v);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

  HermitianOperator operator+(const HermitianOperator& o) const;
  HermitianOperator operator-(const HermitianOperator& o) const;
  HermitianOperator operator*(double s) const;
  HermitianOperator& operator+=(const HermitianOperator& o);

 private:
  struct Unchecked {};
  HermitianOperator(CMatrix m, Unchecked) : m_(std::move(m)) {}
  CMatrix m_;
};

inline HermitianOperator operator*(double s, const HermitianOperator& a) { return a * s; }

/// Hermitian, positive semidefinite (to -1e-10) and unit trace (to 1e-10).
class DensityMatrix : public HermitianOperator {
 public:
  DensityMatrix() : HermitianOperator(HermitianOperator::identity(1)) {}
  explicit DensityMatrix(const HermitianOperator& h);
  explicit DensityMatrix(const CMatrix& m) : DensityMatrix(HermitianOperator(m)) {}

  /// Normalized pure state |v><v| / <v|v>.
  static DensityMatrix pure(const CVector& v);
  static DensityMatrix maximally_mixed(int dim);
};

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns
};

EigenDecomposition eigh(const HermitianOperator& a);

enum class SpectralCutoff {
  kNone,           // apply f to every eigenvalue
  kPseudoInverse,  // eigenvalues below 1e-10 * max|lambda| map to 0
};

/// V f(Lambda) V^dagger. Throws DomainError if f is not finite on a retained
/// eigenvalue.
HermitianOperator matrix_function(const HermitianOperator& a, const std::function<double(double)>& f,
                                  SpectralCutoff cutoff = SpectralCutoff::kNone);

/// A^p on the support of a PSD operator (negative round-off clamped to 0,
/// zero eigenvalues map to 0 for any p, so A^0 is the support projector).
HermitianOperator psd_power(const HermitianOperator& a, double p);

HermitianOperator pseudo_inverse(const HermitianOperator& a);

double trace_norm(const HermitianOperator& a);
double operator_norm(const HermitianOperator& a);
double frobenius_norm(const CMatrix& a);

/// Re Tr[A B].
double trace_product(const HermitianOperator& a, const HermitianOperator& b);

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);
HermitianOperator tensor_power(const HermitianOperator& a, int n);
/// Traces out the second factor of a (dim_a * dim_b)-dimensional operator.
HermitianOperator partial_trace_second(const HermitianOperator& a, int dim_a, int dim_b);

/// F(rho, sigma) = Tr sqrt(sqrt(sigma) rho sqrt(sigma)), clamped to [0, 1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Result of minimizing s -> log Tr[rho^s sigma^(1-s)] over [0, 1].
struct ChernoffResult {
  double value;  // -inf_s log Tr[...]; +inf for orthogonal supports
  double s_opt;
};

ChernoffResult chernoff(const DensityMatrix& rho, const DensityMatrix& sigma);
double chernoff_divergence(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Sandwiched Renyi relative entropy. For alpha > 1 with supp(rho) not in
/// supp(sigma) throws SupportViolation (the value is +infinity). For alpha < 1
/// and orthogonal inputs returns +infinity.
double sandwiched_renyi(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha);

/// Umegaki relative entropy Tr[rho (log rho - log sigma)] (natural log).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

/// 4 Var(H) for a pure state with amplitudes on eigenvalues `spectrum`.
double qfi_pure(std::span<const double> spectrum, std::span<const double> amplitudes);

}  // namespace pacmet
