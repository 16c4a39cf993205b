#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pacmet/opcore.hpp"

using namespace pacmet;

namespace {

CMatrix random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(a);
  return qr.householderQ();
}

std::vector<double> random_probs(int d, std::mt19937_64& rng, double floor = 0.0) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> p(d);
  for (double& x : p) x = u(rng);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return p;
}

// U diag(p) U^dagger
DensityMatrix in_basis(const CMatrix& u, const std::vector<double>& p) {
  CVector v(static_cast<Eigen::Index>(p.size()));
  for (size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i];
  return DensityMatrix(CMatrix(u * v.asDiagonal() * u.adjoint()));
}

DensityMatrix random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  CMatrix r = a * a.adjoint();
  return DensityMatrix(CMatrix(r / r.trace().real()));
}

// Classical oracles on probability vectors.
double classical_fidelity(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
  return s;
}

double classical_renyi(const std::vector<double>& p, const std::vector<double>& q, double a) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) s += std::pow(p[i], a) * std::pow(q[i], 1.0 - a);
  return std::log(s) / (a - 1.0);
}

double classical_chernoff_scan(const std::vector<double>& p, const std::vector<double>& q) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 20000; ++k) {
    const double s = k / 20000.0;
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) acc += std::pow(p[i], s) * std::pow(q[i], 1.0 - s);
    best = std::min(best, std::log(acc));
  }
  return -best;
}

}  // namespace

TEST_CASE("hermitian and density validation") {
  CMatrix m(2, 2);
  m << 1.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 0.0;
  CHECK_THROWS_AS(HermitianOperator{m}, NonHermitian);

  const CMatrix bad_trace = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{bad_trace}, NotDensityMatrix);

  CMatrix negative(2, 2);
  negative << 1.2, 0.0, 0.0, -0.2;
  CHECK_THROWS_AS(DensityMatrix{negative}, NotDensityMatrix);

  CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
}

TEST_CASE("eigh reconstructs and sorts ascending") {
  std::mt19937_64 rng(3);
  const DensityMatrix rho = random_state(5, rng);
  const EigenDecomposition e = eigh(rho);
  for (int i = 1; i < 5; ++i) CHECK(e.values(i) >= e.values(i - 1));
  const CMatrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  CHECK((back - rho.matrix()).norm() < 1e-12);
}

TEST_CASE("psd powers and pseudo-inverse") {
  std::mt19937_64 rng(4);
  const DensityMatrix rho = random_state(4, rng);
  const HermitianOperator half = psd_power(rho, 0.5);
  CHECK((half.matrix() * half.matrix() - rho.matrix()).norm() < 1e-12);

  CVector v(3);
  v << 1.0, cplx(0.0, 2.0), -1.0;
  const DensityMatrix pure = DensityMatrix::pure(v);
  const HermitianOperator support = psd_power(pure, 0.0);
  CHECK((support.matrix() - pure.matrix()).norm() < 1e-12);
  const HermitianOperator pinv = pseudo_inverse(pure);
  CHECK((pinv.matrix() - pure.matrix()).norm() < 1e-10);

  CHECK_THROWS_AS(matrix_function(pure, [](double x) { return std::log(x); }), DomainError);
}

TEST_CASE("norms") {
  const std::vector<double> d = {0.5, -0.25, 0.125};
  const HermitianOperator a = HermitianOperator::diagonal(d);
  CHECK(trace_norm(a) == doctest::Approx(0.875));
  CHECK(operator_norm(a) == doctest::Approx(0.5));
  CHECK(frobenius_norm(a.matrix()) == doctest::Approx(std::sqrt(0.25 + 0.0625 + 0.015625)));
}

TEST_CASE("tensor products and partial trace") {
  std::mt19937_64 rng(5);
  const DensityMatrix a = random_state(2, rng);
  const DensityMatrix b = random_state(3, rng);
  const HermitianOperator ab = kron(a, b);
  CHECK(ab.dim() == 6);
  CHECK(ab.trace() == doctest::Approx(1.0));
  CHECK((partial_trace_second(ab, 2, 3).matrix() - a.matrix()).norm() < 1e-12);
  const HermitianOperator a3 = tensor_power(a, 3);
  CHECK(a3.dim() == 8);
  CHECK((a3.matrix() - kron(a, kron(a, a)).matrix()).norm() < 1e-12);
  CHECK(trace_product(a, a) == doctest::Approx((a.matrix() * a.matrix()).trace().real()));
}

TEST_CASE("fidelity against commuting and pure closed forms") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix u = random_unitary(4, rng);
    const auto p = random_probs(4, rng), q = random_probs(4, rng);
    CHECK(fidelity(in_basis(u, p), in_basis(u, q)) == doctest::Approx(classical_fidelity(p, q)).epsilon(1e-10));
  }
  CVector x(2), y(2);
  x << 1.0, 0.0;
  y << std::cos(0.3), cplx(0.0, std::sin(0.3));
  CHECK(fidelity(DensityMatrix::pure(x), DensityMatrix::pure(y)) == doctest::Approx(std::cos(0.3)));

  const DensityMatrix r = random_state(3, rng), s = random_state(3, rng);
  CHECK(fidelity(r, s) == doctest::Approx(fidelity(s, r)).epsilon(1e-10));
  CHECK(fidelity(r, r) == doctest::Approx(1.0));
}

TEST_CASE("sandwiched Renyi reduces to the classical Renyi divergence") {
  std::mt19937_64 rng(7);
  for (double alpha : {0.5, 0.8, 1.5, 2.0}) {
    const CMatrix u = random_unitary(3, rng);
    const auto p = random_probs(3, rng, 0.05), q = random_probs(3, rng, 0.05);
    CHECK(sandwiched_renyi(in_basis(u, p), in_basis(u, q), alpha) ==
          doctest::Approx(classical_renyi(p, q, alpha)).epsilon(1e-9));
  }
  // Half order is -2 log F.
  const DensityMatrix r = random_state(3, rng), s = random_state(3, rng);
  CHECK(sandwiched_renyi(r, s, 0.5) == doctest::Approx(-2.0 * std::log(fidelity(r, s))).epsilon(1e-9));

  CVector x(2), y(2);
  x << 1.0, 0.0;
  y << 1.0, 1.0;
  CHECK_THROWS_AS(sandwiched_renyi(DensityMatrix::pure(y), DensityMatrix::pure(x), 2.0), SupportViolation);
  CHECK_THROWS_AS(sandwiched_renyi(r, s, 1.0), InvalidArgument);
}

TEST_CASE("Chernoff divergence against a classical scan") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    const CMatrix u = random_unitary(3, rng);
    const auto p = random_probs(3, rng, 0.02), q = random_probs(3, rng, 0.02);
    const ChernoffResult c = chernoff(in_basis(u, p), in_basis(u, q));
    CHECK(c.value == doctest::Approx(classical_chernoff_scan(p, q)).epsilon(1e-6));
    CHECK(c.s_opt >= 0.0);
    CHECK(c.s_opt <= 1.0);
  }
  // Pure states: C = -log |<x|y>|^2.
  CVector x(2), y(2);
  x << 1.0, 0.0;
  y << std::cos(0.4), std::sin(0.4);
  CHECK(chernoff_divergence(DensityMatrix::pure(x), DensityMatrix::pure(y)) ==
        doctest::Approx(-std::log(std::pow(std::cos(0.4), 2))).epsilon(1e-8));
  CVector z(2);
  z << 0.0, 1.0;
  CHECK(std::isinf(chernoff_divergence(DensityMatrix::pure(x), DensityMatrix::pure(z))));
}

TEST_CASE("relative entropy of commuting states is the KL divergence") {
  std::mt19937_64 rng(9);
  const CMatrix u = random_unitary(4, rng);
  const auto p = random_probs(4, rng, 0.05), q = random_probs(4, rng, 0.05);
  double kl = 0.0;
  for (int i = 0; i < 4; ++i) kl += p[i] * std::log(p[i] / q[i]);
  CHECK(relative_entropy(in_basis(u, p), in_basis(u, q)) == doctest::Approx(kl).epsilon(1e-10));
}

TEST_CASE("pure-state QFI is four times the variance") {
  const std::vector<double> spectrum = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> amps = {0.5, 0.5, 0.5, 0.5};
  // Var = E[l^2] - E[l]^2 = 3.5 - 2.25
  CHECK(qfi_pure(spectrum, amps) == doctest::Approx(4.0 * 1.25));
}
