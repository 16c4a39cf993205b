// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "pacmet/bounds.hpp"
#include "pacmet/cli.hpp"
#include "pacmet/cramer_rao.hpp"
#include "pacmet/io.hpp"
#include "pacmet/phase.hpp"

using namespace pacmet;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<int> range(int a, int b, int step) {
  std::vector<int> v;
  for (int n = a; n <= b; n += step) v.push_back(n);
  return v;
}

std::vector<int> powers_of_two(int a, int b) {
  std::vector<int> v;
  for (int n = a; n <= b; n *= 2) v.push_back(n);
  return v;
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<int>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= x.size();
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / ("pacmet_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

DensityMatrix random_qubit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  CMatrix r = a * a.adjoint();
  return DensityMatrix(CMatrix(r / r.trace().real()));
}

Outcome c1() {
  const double delta = 0.04;
  double worst = 0.0;
  for (int n = 1; n <= 1000; ++n) {
    const double closed = delta / kPi + std::sin(n * delta) / (n * kPi);
    worst = std::max(worst, std::abs(covariant_success_probability(probe_ghz(n), delta) - closed));
  }
  const double far = covariant_success_probability(probe_ghz(1000), delta);
  const bool near_guess = std::abs(far - delta / kPi) <= 1.0 / (1000 * kPi);
  return {worst <= 1e-12 && near_guess,
          fmt("max |eta - closed form| = %.3g (tol 1e-12); eta(n=1000) = %.6f vs delta/pi = %.6f", worst, far,
              delta / kPi)};
}

Outcome c2() {
  const int N = 256;
  bool pass = true;
  std::string detail;
  for (double delta : {0.2, 0.3}) {
    for (int n = 1; n <= 3; ++n) {
      const ProbeSpectrum probe = optimal_probe(n, delta).probe;
      const StateFamily fam = covariant_family(probe, N);
      const double step = fam.step();
      const MinimaxSolution mm = solve_minimax_sdp(fam, Window{delta});
      const double closed = covariant_success_probability(probe, delta);
      const double c_rho = estimate_lipschitz(fam);
      const PovmGrid pgm = pgm_grid_povm(probe, N);
      double c_q = 0.0;
      for (int l = 0; l < N; ++l) {
        const CMatrix d = pgm.effect((l + 1) % N).matrix() - pgm.effect(l).matrix();
        c_q = std::max(c_q, operator_norm(HermitianOperator(d)) / (step * step));
      }
      const double allowed = (c_rho + c_q) * step + 1e-5;
      const double diff = std::abs(mm.eta_bar_star - closed);
      pass = pass && diff <= allowed;
      detail += fmt("[d=%.1f n=%d |sdp-closed|=%.2g <= %.2g] ", delta, n, diff, allowed);
    }
  }
  return {pass, detail};
}

Outcome c3() {
  const double delta = 0.04;
  const RateReport r = empirical_rate("opt", [&](int n) { return optimal_probe(n, delta).probe; }, delta,
                                      range(100, 800, 100), parallel_rate_theory(delta));
  const double rel = std::abs(r.fitted_rate - r.theory_rate) / r.theory_rate;
  return {rel <= 0.10, fmt("fitted %.6f vs theory %.7f, relative deviation %.3f (tol 0.10)", r.fitted_rate,
                           r.theory_rate, rel)};
}

Outcome c4() {
  const double delta = 0.3;
  const auto ns = range(20, 160, 20);
  const RateReport plus = empirical_rate("plus", [](int n) { return probe_plus_tensor(n); }, delta, ns,
                                         iid_rate_theory(delta));
  const RateReport opt = empirical_rate("opt", [&](int n) { return optimal_probe(n, delta).probe; }, delta, ns,
                                        parallel_rate_theory(delta));
  const double cap = iid_rate_theory(delta) * 1.1;
  const double ratio = opt.fitted_rate * opt.fitted_rate / plus.fitted_rate;
  const bool pass = plus.fitted_rate <= cap && ratio >= 0.7 && ratio <= 1.4;
  return {pass, fmt("plus rate %.6f (<= %.6f); opt rate %.6f; opt^2/plus = %.4f (want [0.7, 1.4])", plus.fitted_rate,
                    cap, opt.fitted_rate, ratio)};
}

Outcome c5() {
  const double delta = 0.2;
  const RateReport r = empirical_rate("gauss", [&](int n) { return probe_gaussian(n, delta); }, delta,
                                      range(50, 400, 50), gaussian_rate_theory(delta));
  const double rel = std::abs(r.fitted_rate - 0.1) / 0.1;
  return {rel <= 0.15, fmt("fitted %.6f vs 0.1, relative deviation %.3f (tol 0.15)", r.fitted_rate, rel)};
}

Outcome c6() {
  const auto ns = powers_of_two(16, 512);
  std::vector<double> plus, opt;
  for (int n : ns) {
    plus.push_back(covariant_tolerance(probe_plus_tensor(n), 0.99));
    opt.push_back(optimal_covariant_tolerance(n, 0.99));
  }
  const double sp = loglog_slope(ns, plus), so = loglog_slope(ns, opt);
  const bool pass = std::abs(sp + 0.5) <= 0.1 && std::abs(so + 1.0) <= 0.1;
  return {pass, fmt("slope plus %.4f (want -0.5 +- 0.1), slope opt %.4f (want -1.0 +- 0.1)", sp, so)};
}

Outcome c7() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const DensityMatrix rho = random_qubit(rng), sigma = random_qubit(rng);
    const double p = u(rng);
    // Three grid points one window apart: the middle one never matters.
    const StateFamily fam(Domain::bounded(3.0), {rho, DensityMatrix::maximally_mixed(2), sigma});
    const std::vector<int> idx = {0, 2};
    const std::vector<double> w = {p, 1.0 - p};
    SolverConfig cfg;
    cfg.tol = 1e-9;
    const double sdp = solve_bayesian_sdp(fam, Prior::point_masses(3, idx, w), Window{1.0}, cfg).eta_star;
    worst = std::max(worst, std::abs(sdp - helstrom({rho, sigma, p})));
  }
  return {worst <= 1e-6, fmt("max |sdp - Helstrom| over 20 pairs = %.3g (tol 1e-6)", worst)};
}

struct Fixture {
  std::string name;
  nlohmann::json family;
  double delta;
};

nlohmann::json states_family(const char* domain_kind, double T, const std::vector<std::vector<double>>& diags) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& d : diags) {
    nlohmann::json re = nlohmann::json::array();
    for (size_t i = 0; i < d.size(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (size_t j = 0; j < d.size(); ++j) row.push_back(i == j ? d[i] : 0.0);
      re.push_back(row);
    }
    states.push_back({{"re", re}});
  }
  return {{"kind", "states"}, {"domain", {{"kind", domain_kind}, {"T", T}}}, {"states", states}};
}

std::vector<Fixture> bound_fixtures() {
  const nlohmann::json bounded_pi = {{"kind", "bounded"}, {"T", "pi"}};
  const nlohmann::json periodic_2pi = {{"kind", "periodic"}, {"T", "2pi"}};
  std::vector<std::vector<double>> constant(8, {0.5, 0.5}), orth2, orth3;
  for (int l = 0; l < 8; ++l) orth2.push_back(l % 2 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0});
  for (int l = 0; l < 9; ++l) {
    std::vector<double> d(3, 0.0);
    d[l % 3] = 1.0;
    orth3.push_back(d);
  }
  return {
      {"dephasing bounded", {{"kind", "dephasing"}, {"omega", 1.0}, {"N", 16}, {"domain", bounded_pi}}, 0.4},
      {"dephasing periodic", {{"kind", "dephasing"}, {"omega", 1.0}, {"N", 16}, {"domain", periodic_2pi}}, 0.5},
      {"dephasing 2 copies",
       {{"kind", "dephasing"}, {"omega", 1.0}, {"N", 16}, {"domain", bounded_pi}, {"copies", 2}},
       0.4},
      {"covariant plus n=1", {{"kind", "covariant"}, {"probe", "plus"}, {"n", 1}, {"N", 64}}, 0.3},
      {"covariant plus n=2", {{"kind", "covariant"}, {"probe", "plus"}, {"n", 2}, {"N", 32}}, 0.4},
      {"covariant ghz n=3", {{"kind", "covariant"}, {"probe", "ghz"}, {"n", 3}, {"N", 32}}, 0.3},
      {"covariant opt n=3", {{"kind", "covariant"}, {"probe", "opt"}, {"n", 3}, {"N", 32}, {"delta", 0.3}}, 0.3},
      {"constant", states_family("periodic", 1.0, constant), 0.25},
      {"orthogonal qubit", states_family("periodic", 1.0, orth2), 0.25},
      {"orthogonal qutrit", states_family("bounded", 1.0, orth3), 0.2},
  };
}

Outcome c8() {
  const fs::path dir = scratch();
  bool pass = true;
  int checks = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string failures;
  for (const Fixture& f : bound_fixtures()) {
    const fs::path path = dir / "family.json";
    write_text_atomic(path.string(), f.family.dump());
    std::ostringstream out, err;
    const int code = run_cli(
        {"bounds", "--family", path.string(), "--delta", format_number(f.delta), "--eta", "0.9", "--exact"}, out, err);
    if (code != 0) {
      pass = false;
      failures += " [" + f.name + ": exit " + std::to_string(code) + " " + err.str() + "]";
      continue;
    }
    const auto j = nlohmann::json::parse(out.str());
    for (const auto& c : j["checks"]) {
      ++checks;
      if (c.contains("slack") && c["slack"].is_number()) worst = std::min(worst, c["slack"].get<double>());
    }
    if (j["consistent"] != true) {
      pass = false;
      failures += " [" + f.name + " inconsistent]";
    }
  }
  fs::remove_all(dir);
  return {pass, fmt("10 fixtures, %d ordering checks, smallest slack %.3g (tol -1e-4)", checks, worst) + failures};
}

Outcome c9() {
  const StateFamily fam = build_dephasing_family(1.0, 16, Domain::bounded(kPi));
  const Window w{0.4};
  const double chernoff = chernoff_rate_bound(fam, w).value;
  std::vector<double> rates;
  SolverConfig cfg;
  cfg.tol = 1e-5;
  for (int n = 1; n <= 3; ++n) {
    const double eta = solve_minimax_sdp(tensor_power_family(fam, n), w, cfg).eta_bar_star;
    rates.push_back(-std::log(1.0 - eta) / n);
  }
  bool pass = true;
  for (size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] > chernoff + 0.05) pass = false;
    if (i > 0 && rates[i] < rates[i - 1]) pass = false;
  }
  return {pass, fmt("rates n=1,2,3: %.4f %.4f %.4f; Chernoff bound %.4f (+0.05 allowed); want nondecreasing",
                    rates[0], rates[1], rates[2], chernoff)};
}

Outcome c10() {
  const std::vector<HermitianOperator> pm = load_measurement(std::string(PACMET_TEST_DATA) + "/plus_minus.json");
  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(10);
  for (int N : {8, 12, 16}) {
    const StateFamily fam = build_dephasing_family(1.0, N, Domain::bounded(kPi));
    const Prior prior = Prior::uniform(N);
    const Window w{0.4};
    const LikelihoodTable t = make_likelihood_table(fam, prior, pm);
    const PostprocessResult r = smap_postprocess(t, fam, w);
    std::uniform_int_distribution<int> pick(0, N - 1);
    double best_random = 0.0;
    for (int i = 0; i < 100; ++i) {
      best_random = std::max(best_random, strategy_success_probability(t, fam, w, {pick(rng), pick(rng)}));
    }
    pass = pass && r.eta >= best_random - 1e-12;
    detail += fmt("[N=%d smap %.9f random best %.9f", N, r.eta, best_random);
    if (N <= 12) {
      double exhaustive = 0.0;
      for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) exhaustive = std::max(exhaustive, strategy_success_probability(t, fam, w, {a, b}));
      }
      pass = pass && std::abs(r.eta - exhaustive) <= 1e-12;
      detail += fmt(" exhaustive %.9f", exhaustive);
    }
    detail += "] ";
  }
  return {pass, detail};
}

Outcome c11() {
  bool pass = true;
  std::string detail;
  for (int n : {8, 16, 32}) {
    const CramerRaoReport cr = cramer_rao_like_bound(half_log_fidelity(probe_plus_tensor(n)), {0.0}, 0.99);
    const CramerRaoReport cr4 = cramer_rao_like_bound(half_log_fidelity(probe_plus_tensor(4 * n)), {0.0}, 0.99);
    const double tol = covariant_tolerance(probe_plus_tensor(n), 0.99);
    const double ratio = cr4.coeffs.q / cr.coeffs.q;
    pass = pass && cr.delta_lb <= tol && ratio >= 0.4 && ratio <= 0.6;
    detail += fmt("[n=%d lb %.5f <= tol %.5f, q(4n)/q(n) %.4f] ", n, cr.delta_lb, tol, ratio);
  }
  return {pass, detail};
}

Outcome c12() {
  const double eta = std::erf(1.0 / std::sqrt(2.0));
  double lo = 1e9, hi = 0.0;
  for (int n : powers_of_two(16, 256)) {
    const double r = covariant_tolerance(probe_plus_tensor(n), eta) * std::sqrt(static_cast<double>(n));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo >= 0.75 && hi <= 1.25, fmt("tolerance * sqrt(n) in [%.4f, %.4f] for n = 16..256 (want within 25%% of 1)",
                                        lo, hi)};
}

Outcome c13() {
  const fs::path dir = scratch();
  const std::string data = PACMET_TEST_DATA;
  const std::vector<std::vector<std::string>> configs = {
      {"phase-sweep", "--probe", "ghz,plus,hb,gauss,opt", "--n-range", "1:60", "--delta", "0.3", "--eta", "0.5"},
      {"tolerance-sweep", "--probe", "plus,opt", "--n-range", "2:20:2", "--eta", "0.9", "--delta", "0.3"},
      {"sdp", "--family", data + "/dephasing.json", "--delta", "0.4", "--minimax"},
      {"bounds", "--family", data + "/covariant_qubit.json", "--delta", "0.3", "--eta", "0.9"},
      {"rate-fit", "--probe", "opt", "--delta", "0.3", "--n-range", "10:60:10"},
      {"smap", "--family", data + "/dephasing.json", "--povm", data + "/plus_minus.json", "--delta", "0.4", "--seed",
       "11"},
  };
  bool pass = true;
  std::string detail;
  for (const auto& cfg : configs) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      auto args = cfg;
      const fs::path out = dir / ("run" + std::to_string(rep));
      args.push_back("--out");
      args.push_back(out.string());
      std::ostringstream o, e;
      if (run_cli(args, o, e) != 0) pass = false;
      std::ifstream in(out, std::ios::binary);
      bytes[rep].assign(std::istreambuf_iterator<char>(in), {});
    }
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    pass = pass && same;
    detail += cfg[0] + (same ? " identical; " : " DIFFERS; ");
  }
  fs::remove_all(dir);
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
  double time_limit;  // seconds, 0 for none
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-13)");
  CLI11_PARSE(app, argc, argv);
  apply_thread_cap_from_env();

  const std::vector<Criterion> all = {
      {1, "GHZ closed form", c1, 1.0},
      {2, "PGM optimality on the grid", c2, 120.0},
      {3, "parallel rate", c3, 300.0},
      {4, "i.i.d. vs parallel gap", c4, 0.0},
      {5, "Gaussian rate", c5, 0.0},
      {6, "scaling laws", c6, 0.0},
      {7, "Helstrom endpoints", c7, 0.0},
      {8, "bound ordering", c8, 300.0},
      {9, "commuting-case rate", c9, 0.0},
      {10, "SMAP optimality", c10, 0.0},
      {11, "Cramer-Rao-like bound", c11, 0.0},
      {12, "QCRB agreement", c12, 0.0},
      {13, "determinism", c13, 0.0},
  };

  int failed = 0;
  for (const Criterion& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0.0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += fmt(" [runtime %.1f s exceeds %.0f s]", secs, c.time_limit);
    }
    std::printf("c%-2d %s  %s: %s (%.2f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
