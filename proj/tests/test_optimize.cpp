#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "pacmet/optimize.hpp"

using namespace pacmet;

namespace {

DensityMatrix random_qubit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  CMatrix r = a * a.adjoint();
  return DensityMatrix(CMatrix(r / r.trace().real()));
}

StateFamily constant_family(int N, double T, int dim = 2) {
  return build_family(Domain::periodic(T), N, [dim](double) { return DensityMatrix::maximally_mixed(dim); });
}

std::vector<HermitianOperator> plus_minus() {
  CMatrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  return {HermitianOperator(plus), HermitianOperator(minus)};
}

StateFamily dephasing_fixture(int N = 16) { return build_dephasing_family(1.0, N, Domain::bounded(std::numbers::pi)); }

}  // namespace

TEST_CASE("least upper bound of commuting operators is the entrywise maximum") {
  const std::vector<double> a = {0.3, 0.1, 0.2}, b = {0.1, 0.4, 0.05}, c = {0.2, 0.2, 0.25};
  const std::vector<HermitianOperator> B = {HermitianOperator::diagonal(a), HermitianOperator::diagonal(b),
                                            HermitianOperator::diagonal(c)};
  const LeastUpperBound r = solve_least_upper_bound(B);
  CHECK(r.dual == doctest::Approx(0.3 + 0.4 + 0.25).epsilon(1e-6));
  CHECK(r.primal <= r.dual + 1e-12);
  CHECK(r.dual - r.primal <= 1e-6);
  HermitianOperator sum = HermitianOperator::zero(3);
  for (const auto& q : r.effects) sum += q;
  CHECK((sum.matrix() - CMatrix::Identity(3, 3)).norm() < 1e-9);
}

TEST_CASE("two-point instances reproduce the Helstrom value") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int rep = 0; rep < 5; ++rep) {
    const DensityMatrix rho = random_qubit(rng), sigma = random_qubit(rng);
    const double p = u(rng);
    const std::vector<DensityMatrix> states = {rho, DensityMatrix::maximally_mixed(2), sigma};
    const StateFamily fam(Domain::bounded(3.0), states);
    const std::vector<int> idx = {0, 2};
    const std::vector<double> w = {p, 1.0 - p};
    const SdpSolution s = solve_bayesian_sdp(fam, Prior::point_masses(3, idx, w), Window{1.0});
    const HermitianOperator diff = p * static_cast<const HermitianOperator&>(rho) -
                                   (1.0 - p) * static_cast<const HermitianOperator&>(sigma);
    CHECK(s.eta_star == doctest::Approx(0.5 + 0.5 * trace_norm(diff)).epsilon(1e-6));
  }
}

TEST_CASE("constant family: success probability 2 delta / T") {
  const StateFamily fam = constant_family(8, 1.0);
  const SdpSolution b = solve_bayesian_sdp(fam, Prior::uniform(8), Window{0.25});
  CHECK(b.eta_star == doctest::Approx(0.5).epsilon(1e-6));
  const MinimaxSolution m = solve_minimax_sdp(fam, Window{0.25});
  CHECK(m.eta_bar_star == doctest::Approx(0.5).epsilon(1e-5));
  double mass = 0.0;
  for (double x : m.prior.weights()) mass += x;
  CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("dephasing fixture matches the linear-programming golden value") {
  std::ifstream in(std::string(PACMET_TEST_DATA) + "/dephasing_golden.json");
  const auto golden = nlohmann::json::parse(in);
  const StateFamily fam = dephasing_fixture();
  const double delta = golden["delta"];
  const SdpSolution s = solve_bayesian_sdp(fam, Prior::uniform(16), Window{delta});
  CHECK(s.stencil.k == golden["k"].get<int>());
  CHECK(s.eta_star == doctest::Approx(golden["eta_star"].get<double>()).epsilon(1e-6));
  CHECK(s.duality_gap <= 1e-6);
  CHECK_NOTHROW(conditional_min_entropy_check(s));
  CHECK(success_probability(fam, Prior::uniform(16), Window{delta}, s.povm) ==
        doctest::Approx(s.eta_star).epsilon(1e-9));
}

TEST_CASE("minimax value is at most the Bayesian value and the POVM certifies it") {
  const StateFamily fam = dephasing_fixture();
  const Window w{0.4};
  const MinimaxSolution m = solve_minimax_sdp(fam, w);
  const SdpSolution b = solve_bayesian_sdp(fam, m.prior, w);
  CHECK(m.eta_bar_star <= b.eta_star + 1e-5);
  CHECK(minimax_success_probability(fam, w, m.povm) == doctest::Approx(m.eta_bar_star).epsilon(1e-9));
  CHECK(m.gap <= 1e-4);
  const auto profile = acceptance_profile(fam, w, m.povm);
  for (double a : profile) CHECK(a >= m.eta_bar_star - 1e-12);
  CHECK(interior_minimax_success_probability(fam, w, m.povm) >= m.eta_bar_star - 1e-12);
}

TEST_CASE("serial and parallel solvers agree bit for bit") {
  const StateFamily fam = dephasing_fixture();
  SolverConfig s, p;
  s.exec = Exec::kSerial;
  p.exec = Exec::kParallel;
  CHECK(solve_bayesian_sdp(fam, Prior::uniform(16), Window{0.4}, s).eta_star ==
        solve_bayesian_sdp(fam, Prior::uniform(16), Window{0.4}, p).eta_star);
  CHECK(solve_minimax_sdp(fam, Window{0.4}, s).eta_bar_star == solve_minimax_sdp(fam, Window{0.4}, p).eta_bar_star);
}

TEST_CASE("POVM validation") {
  CHECK_THROWS(PovmGrid({HermitianOperator::identity(2) * 0.5}, {0.0}));
  CHECK_NOTHROW(PovmGrid({HermitianOperator::identity(2) * 0.5, HermitianOperator::identity(2) * 0.5}, {0.0, 1.0}));
}

TEST_CASE("SMAP is optimal over all strategies") {
  for (int N : {8, 12}) {
    const StateFamily fam = dephasing_fixture(N);
    const Prior prior = Prior::uniform(N);
    const LikelihoodTable t = make_likelihood_table(fam, prior, plus_minus());
    const Window w{0.5};
    const PostprocessResult r = smap_postprocess(t, fam, w);
    CHECK(strategy_success_probability(t, fam, w, r.strategy) == doctest::Approx(r.eta));
    double best = 0.0;
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) best = std::max(best, strategy_success_probability(t, fam, w, {a, b}));
    }
    CHECK(r.eta == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("SMCL bound is at most the minimax value of its strategy") {
  const StateFamily fam = dephasing_fixture();
  const LikelihoodTable t = make_likelihood_table(fam, Prior::uniform(16), plus_minus());
  for (double delta : {0.4, 0.8, 1.2}) {
    const PostprocessResult r = smcl_postprocess(t, fam, Window{delta});
    CHECK(r.eta <= strategy_minimax_success_probability(t, fam, Window{delta}, r.strategy) + 1e-12);
  }
}

TEST_CASE("smallest radius search") {
  const auto eta = [](int k) { return 0.1 * k; };
  CHECK(smallest_radius(eta, 10, 0.35) == 4);
  CHECK(smallest_radius(eta, 10, 0.0) == 0);
  CHECK_THROWS_AS(smallest_radius(eta, 5, 0.9), Unreachable);
}

TEST_CASE("optimal tolerance on the constant family") {
  const StateFamily fam = constant_family(8, 1.0);
  const ToleranceResult r = optimal_tolerance(fam, Setting::kBayesian, 0.5, Prior::uniform(8));
  CHECK(r.k == 2);
  CHECK(r.delta == doctest::Approx(0.25));
  const ToleranceResult m = optimal_tolerance(fam, Setting::kMinimax, 0.5);
  CHECK(m.k == 2);
}

TEST_CASE("sample complexity") {
  const StateFamily fam = build_dephasing_family(1.0, 8, Domain::periodic(2.0 * std::numbers::pi));
  const Window w{2.0 * std::numbers::pi / 8.0 * 2.0};
  const double eta1 = solve_bayesian_sdp(fam, Prior::uniform(8), w).eta_star;
  CHECK(sample_complexity(fam, Setting::kBayesian, eta1 - 1e-6, w, 2, Prior::uniform(8)) == 1);
  CHECK(sample_complexity(fam, Setting::kBayesian, 0.999, w, 2, Prior::uniform(8)) == kSampleComplexityInfinite);

  const StateFamily wide = constant_family(4, 1.0, 9);
  CHECK_THROWS_AS(sample_complexity(wide, Setting::kMinimax, 0.999, Window{0.25}, 3), SizeGuard);
}

TEST_CASE("subdivision bound is an upper bound") {
  const StateFamily fam = dephasing_fixture();
  const Window w{0.4};
  const double eta = solve_bayesian_sdp(fam, Prior::uniform(16), w).eta_star;
  CHECK(subdivision_bound(fam, Prior::uniform(16), w, 1.0) >= eta - 1e-6);
  CHECK_THROWS_AS(subdivision_bound(fam, Prior::uniform(16), w, 0.5), InvalidArgument);
}
