#include "pacmet/opcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pacmet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(const HermitianOperator& a, const HermitianOperator& b, const char* where) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << where << ": dims " << a.dim() << " vs " << b.dim();
    throw DimensionMismatch(os.str());
  }
}

}  // namespace

HermitianOperator::HermitianOperator(const CMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw NonHermitian("matrix must be square with dim >= 1");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") differs from conjugate transpose by "
           << std::abs(m(i, j) - std::conj(m(j, i)));
        throw NonHermitian(os.str());
      }
    }
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::from_hermitian_part(const CMatrix& m) {
  return HermitianOperator(CMatrix(0.5 * (m + m.adjoint())), Unchecked{});
}

HermitianOperator HermitianOperator::identity(int dim) {
  return HermitianOperator(CMatrix::Identity(dim, dim), Unchecked{});
}

HermitianOperator HermitianOperator::zero(int dim) {
  return HermitianOperator(CMatrix::Zero(dim, dim), Unchecked{});
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> diag) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return HermitianOperator(std::move(m), Unchecked{});
}

HermitianOperator HermitianOperator::projector(const CVector& v) {
  return HermitianOperator(CMatrix(v * v.adjoint()), Unchecked{});
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
  require_same_dim(*this, o, "operator+");
  return HermitianOperator(CMatrix(m_ + o.m_), Unchecked{});
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
  require_same_dim(*this, o, "operator-");
  return HermitianOperator(CMatrix(m_ - o.m_), Unchecked{});
}

HermitianOperator HermitianOperator::operator*(double s) const {
  return HermitianOperator(CMatrix(m_ * s), Unchecked{});
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  require_same_dim(*this, o, "operator+=");
  m_ += o.m_;
  return *this;
}

DensityMatrix::DensityMatrix(const HermitianOperator& h) : HermitianOperator(h) {
  const double tr = trace();
  if (std::abs(tr - 1.0) > kDensityTraceTol) {
    std::ostringstream os;
    os << "trace is " << tr;
    throw NotDensityMatrix(os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -kDensityPsdTol) {
    std::ostringstream os;
    os << "smallest eigenvalue is " << es.eigenvalues()(0);
    throw NotDensityMatrix(os.str());
  }
}

DensityMatrix DensityMatrix::pure(const CVector& v) {
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw InvalidArgument("pure state from zero vector");
  return DensityMatrix(HermitianOperator::projector(v / std::sqrt(n2)));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(HermitianOperator::identity(dim) * (1.0 / dim));
}

EigenDecomposition eigh(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw DomainError("eigen decomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

HermitianOperator matrix_function(const HermitianOperator& a, const std::function<double(double)>& f,
                                  SpectralCutoff cutoff) {
  const EigenDecomposition ed = eigh(a);
  const Eigen::Index d = ed.values.size();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) scale = std::max(scale, std::abs(ed.values(i)));
  Eigen::VectorXd fv(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = ed.values(i);
    if (cutoff == SpectralCutoff::kPseudoInverse && std::abs(lam) <= kPseudoInverseCutoff * scale) {
      fv(i) = 0.0;
      continue;
    }
    fv(i) = f(lam);
    if (!std::isfinite(fv(i))) {
      std::ostringstream os;
      os << "function not finite at eigenvalue " << lam;
      throw DomainError(os.str());
    }
  }
  return HermitianOperator::from_hermitian_part(ed.vectors * fv.asDiagonal() * ed.vectors.adjoint());
}

HermitianOperator psd_power(const HermitianOperator& a, double p) {
  const EigenDecomposition ed = eigh(a);
  const Eigen::Index d = ed.values.size();
  const double scale = std::max(std::abs(ed.values(0)), std::abs(ed.values(d - 1)));
  Eigen::VectorXd fv(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = ed.values(i);
    fv(i) = (lam <= kPseudoInverseCutoff * scale) ? 0.0 : std::pow(lam, p);
  }
  return HermitianOperator::from_hermitian_part(ed.vectors * fv.asDiagonal() * ed.vectors.adjoint());
}

HermitianOperator pseudo_inverse(const HermitianOperator& a) {
  return matrix_function(a, [](double x) { return 1.0 / x; }, SpectralCutoff::kPseudoInverse);
}

double trace_norm(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double operator_norm(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double frobenius_norm(const CMatrix& a) { return a.norm(); }

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "trace_product");
  // Tr[AB] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().array().conjugate()).sum().real();
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  const int da = a.dim(), db = b.dim();
  CMatrix out(da * db, da * db);
  for (int i = 0; i < da; ++i) {
    for (int j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
  }
  return HermitianOperator::from_hermitian_part(out);
}

HermitianOperator tensor_power(const HermitianOperator& a, int n) {
  if (n < 1) throw InvalidArgument("tensor_power needs n >= 1");
  HermitianOperator out = a;
  for (int k = 1; k < n; ++k) out = kron(out, a);
  return out;
}

HermitianOperator partial_trace_second(const HermitianOperator& a, int dim_a, int dim_b) {
  if (a.dim() != dim_a * dim_b) throw DimensionMismatch("partial_trace_second: dim mismatch");
  CMatrix out = CMatrix::Zero(dim_a, dim_a);
  for (int i = 0; i < dim_a; ++i) {
    for (int j = 0; j < dim_a; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < dim_b; ++k) s += a(i * dim_b + k, j * dim_b + k);
      out(i, j) = s;
    }
  }
  return HermitianOperator::from_hermitian_part(out);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "fidelity");
  const HermitianOperator sq = psd_power(sigma, 0.5);
  const HermitianOperator m = HermitianOperator::from_hermitian_part(sq.matrix() * rho.matrix() * sq.matrix());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) f += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return std::clamp(f, 0.0, 1.0);
}

ChernoffResult chernoff(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "chernoff_divergence");
  const EigenDecomposition er = eigh(rho);
  const EigenDecomposition es = eigh(sigma);
  const Eigen::Index d = er.values.size();
  const double cut = kPseudoInverseCutoff;
  // Tr[rho^s sigma^(1-s)] = sum_ij a_i^s b_j^(1-s) |<u_i|v_j>|^2 over both supports.
  const Eigen::MatrixXd overlap = (er.vectors.adjoint() * es.vectors).cwiseAbs2();
  auto log_trace = [&](double s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double a = er.values(i);
      if (a <= cut) continue;
      const double as = (s == 0.0) ? 1.0 : std::pow(a, s);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double b = es.values(j);
        if (b <= cut) continue;
        const double bs = (s == 1.0) ? 1.0 : std::pow(b, 1.0 - s);
        acc += as * bs * overlap(i, j);
      }
    }
    return acc > 0.0 ? std::log(acc) : -kInf;
  };

  // log Tr[rho^s sigma^(1-s)] is convex in s, so golden-section finds the minimum.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = log_trace(x1), f2 = log_trace(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = log_trace(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = log_trace(x2);
    }
  }
  double s_best = 0.5 * (lo + hi);
  double f_best = log_trace(s_best);
  for (double s : {0.0, 1.0}) {
    const double f = log_trace(s);
    if (f < f_best) {
      f_best = f;
      s_best = s;
    }
  }
  if (std::isnan(f_best)) {
    // Fall back to a grid scan if the search produced garbage.
    f_best = kInf;
    for (int k = 0; k <= 1000; ++k) {
      const double s = k / 1000.0;
      const double f = log_trace(s);
      if (f < f_best) {
        f_best = f;
        s_best = s;
      }
    }
  }
  return {std::max(0.0, -f_best), s_best};
}

double chernoff_divergence(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return chernoff(rho, sigma).value;
}

double sandwiched_renyi(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha) {
  require_same_dim(rho, sigma, "sandwiched_renyi");
  if (!(alpha > 0.0) || alpha == 1.0) throw InvalidArgument("alpha must lie in (0,1) or (1,inf)");
  if (alpha > 1.0) {
    const HermitianOperator support = psd_power(sigma, 0.0);
    const HermitianOperator outside = HermitianOperator::identity(rho.dim()) - support;
    const double leak = trace_product(outside, rho);
    if (leak > 1e-10) {
      std::ostringstream os;
      os << "rho has weight " << leak << " outside supp(sigma)";
      throw SupportViolation(os.str());
    }
  }
  const HermitianOperator p = psd_power(sigma, (1.0 - alpha) / (2.0 * alpha));
  const HermitianOperator m = HermitianOperator::from_hermitian_part(p.matrix() * rho.matrix() * p.matrix());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 0.0) tr += std::pow(lam, alpha);
  }
  if (!(tr > 0.0)) return kInf;
  return std::log(tr) / (alpha - 1.0);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "relative_entropy");
  const EigenDecomposition er = eigh(rho);
  const EigenDecomposition es = eigh(sigma);
  const Eigen::MatrixXd overlap = (er.vectors.adjoint() * es.vectors).cwiseAbs2();
  double value = 0.0;
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const double a = er.values(i);
    if (a <= kPseudoInverseCutoff) continue;
    value += a * std::log(a);
    for (Eigen::Index j = 0; j < es.values.size(); ++j) {
      const double b = es.values(j);
      if (overlap(i, j) * a <= 1e-15) continue;
      if (b <= kPseudoInverseCutoff) return kInf;
      value -= a * overlap(i, j) * std::log(b);
    }
  }
  return value;
}

double qfi_pure(std::span<const double> spectrum, std::span<const double> amplitudes) {
  if (spectrum.size() != amplitudes.size()) throw DimensionMismatch("qfi_pure: sizes differ");
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double p = amplitudes[i] * amplitudes[i];
    m1 += p * spectrum[i];
    m2 += p * spectrum[i] * spectrum[i];
  }
  return std::max(0.0, 4.0 * (m2 - m1 * m1));
}

}  // namespace pacmet
