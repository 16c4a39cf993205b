#include "pacmet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "pacmet/bounds.hpp"
#include "pacmet/cramer_rao.hpp"
#include "pacmet/io.hpp"
#include "pacmet/kernels.hpp"
#include "pacmet/phase.hpp"

namespace pacmet {

namespace {

constexpr double kOrderingSlack = 1e-4;
constexpr double kDefaultEta = 0.99;
constexpr double kDefaultDelta = 0.04;

struct RunConfig {
  std::string command;
  std::string family_path;
  std::string povm_path;
  std::string out_path;
  double delta = kDefaultDelta;
  double eta = kDefaultEta;
  int n = 0;
  std::string n_range;
  int grid = 0;
  double tol = 1e-5;  // minimax primals stall near 1e-6 in double precision
  std::vector<std::string> probes;
  bool minimax = false;
  bool exact = false;
  std::uint64_t seed = 0;
  int trials = 100;

  // Which options were given explicitly.
  bool has_delta = false, has_eta = false, has_n = false, has_grid = false;
};

std::string format_long(long double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12Lg", x);
  return buf;
}

json long_json(long double x) {
  if (!std::isfinite(x)) return format_long(x);
  return std::strtod(format_long(x).c_str(), nullptr);
}

// Output sink: --out goes through a temporary file renamed on success,
// otherwise rows go straight to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) file_ = std::make_unique<AtomicFile>(path);
  }
  std::ostream& stream() { return file_ ? file_->stream() : fallback_; }
  void flush() { stream().flush(); }
  void commit() {
    if (file_) {
      file_->commit();
    } else {
      fallback_.flush();
    }
  }

 private:
  std::ostream& fallback_;
  std::unique_ptr<AtomicFile> file_;
};

void emit_json(const RunConfig& cfg, std::ostream& out, const json& j) {
  Sink sink(cfg.out_path, out);
  sink.stream() << j.dump(2) << '\n';
  sink.commit();
}

std::vector<int> n_list(const RunConfig& cfg) {
  if (!cfg.n_range.empty()) {
    std::vector<long> parts;
    std::stringstream ss(cfg.n_range);
    std::string item;
    while (std::getline(ss, item, ':')) {
      char* end = nullptr;
      const long v = std::strtol(item.c_str(), &end, 10);
      if (item.empty() || *end != '\0') throw ConfigError("--n-range: '" + cfg.n_range + "' is not a:b[:step]");
      parts.push_back(v);
    }
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("--n-range: expected a:b or a:b:step");
    const long step = parts.size() == 3 ? parts[2] : 1;
    if (parts[0] < 1 || parts[1] < parts[0] || step < 1) {
      throw ConfigError("--n-range: need 1 <= a <= b and step >= 1");
    }
    std::vector<int> out;
    for (long v = parts[0]; v <= parts[1]; v += step) out.push_back(static_cast<int>(v));
    return out;
  }
  if (cfg.has_n) {
    if (cfg.n < 1) throw ConfigError("--n: must be at least 1");
    return {cfg.n};
  }
  throw ConfigError("one of --n or --n-range is required");
}

void require_delta_in(const RunConfig& cfg, double hi, const char* what) {
  if (!(cfg.delta > 0.0 && cfg.delta < hi)) {
    std::ostringstream os;
    os << "--delta: " << what << " needs 0 < delta < " << format_number(hi);
    throw ConfigError(os.str());
  }
}

void require_eta_in_unit(const RunConfig& cfg) {
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw ConfigError("--eta: must lie in (0, 1)");
}

void require_family(const RunConfig& cfg) {
  if (cfg.family_path.empty()) throw ConfigError("--family is required");
  if (!cfg.has_delta) throw ConfigError("--delta is required with --family");
  if (!(cfg.delta > 0.0)) throw ConfigError("--delta: must be positive");
}

void warn_grid(const StateFamily& fam, std::ostream& err) {
  const int N = fam.size();
  if ((N & (N - 1)) != 0) err << "warning: grid size " << N << " is not a power of two\n";
}

std::vector<std::string> probe_list(const RunConfig& cfg) {
  std::vector<std::string> probes = cfg.probes;
  if (probes.empty()) probes = {"ghz", "plus", "hb", "gauss", "opt"};
  for (const auto& p : probes) {
    if (!is_probe_name(p)) throw ConfigError("--probe: unknown probe '" + p + "'");
  }
  return probes;
}

std::optional<double> theory_rate(const std::string& probe, double delta) {
  if (probe == "opt" || probe == "bessel") return parallel_rate_theory(delta);
  if (probe == "plus") return iid_rate_theory(delta);
  if (probe == "gauss") return gaussian_rate_theory(delta);
  if (probe == "ghz") return 0.0;
  return std::nullopt;
}

// inf when the target is out of reach.
double tolerance_of(const std::string& probe, int n, double delta, double eta) {
  try {
    if (probe == "opt") return optimal_covariant_tolerance(n, eta);
    return covariant_tolerance(probe_by_name(probe, n, delta), eta);
  } catch (const Unreachable&) {
    return std::numeric_limits<double>::infinity();
  }
}

// ---------------------------------------------------------------- phase-sweep

int cmd_phase_sweep(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_delta_in(cfg, std::numbers::pi, "phase-sweep");
  if (cfg.has_eta) require_eta_in_unit(cfg);
  const auto probes = probe_list(cfg);
  const auto ns = n_list(cfg);

  Sink sink(cfg.out_path, out);
  sink.stream() << "probe,n,delta,eta,one_minus_eta,delta_star,rate_fit,rate_theory\n";
  for (const auto& name : probes) {
    const auto family = [&](int n) { return probe_by_name(name, n, cfg.delta); };
    const auto theory = theory_rate(name, cfg.delta);
    std::vector<long double> err;
    std::optional<double> fitted;
    if (ns.size() >= 3 && std::is_sorted(ns.begin(), ns.end())) {
      try {
        const RateReport r = empirical_rate(name, family, cfg.delta, ns, theory.value_or(0.0));
        err = r.one_minus_eta;
        fitted = r.fitted_rate;
      } catch (const Saturated&) {
      }
    }
    if (err.empty()) {
      for (int n : ns) err.push_back(covariant_error_probability(family(n), cfg.delta));
    }
    for (size_t i = 0; i < ns.size(); ++i) {
      std::ostream& os = sink.stream();
      os << name << ',' << ns[i] << ',' << format_number(cfg.delta) << ',' << format_long(1.0L - err[i]) << ','
         << format_long(err[i]) << ',';
      if (cfg.has_eta) os << format_number(tolerance_of(name, ns[i], cfg.delta, cfg.eta));
      os << ',';
      if (fitted) os << format_number(*fitted);
      os << ',';
      if (theory) os << format_number(*theory);
      os << '\n';
      sink.flush();
    }
  }
  sink.commit();
  return 0;
}

// ------------------------------------------------------------ tolerance-sweep

int cmd_tolerance_sweep(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_eta_in_unit(cfg);
  require_delta_in(cfg, std::numbers::pi, "the gaussian probe width");
  const auto probes = probe_list(cfg);
  const auto ns = n_list(cfg);

  Sink sink(cfg.out_path, out);
  sink.stream() << "probe,n,eta,delta_star,qcrb\n";
  for (const auto& name : probes) {
    for (int n : ns) {
      const double tol = tolerance_of(name, n, cfg.delta, cfg.eta);
      const ProbeSpectrum probe =
          name == "opt" && std::isfinite(tol) ? optimal_probe(n, tol).probe : probe_by_name(name, n, cfg.delta);
      std::vector<double> spectrum(static_cast<size_t>(n) + 1);
      std::iota(spectrum.begin(), spectrum.end(), 0.0);
      const double qfi = qfi_pure(spectrum, probe.amps());
      sink.stream() << name << ',' << n << ',' << format_number(cfg.eta) << ',' << format_number(tol) << ','
                    << format_number(qfi > 0.0 ? 1.0 / std::sqrt(qfi) : std::numeric_limits<double>::infinity())
                    << '\n';
      sink.flush();
    }
  }
  sink.commit();
  return 0;
}

// ------------------------------------------------------------------------ sdp

json stencil_json(const RunConfig& cfg, const WindowStencil& st) {
  return {{"delta_requested", number_json(cfg.delta)}, {"delta_snapped", number_json(st.delta)}, {"k", st.k}};
}

int cmd_sdp(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_family(cfg);
  FamilySpec spec = load_family(cfg.family_path, cfg.has_grid ? std::optional<int>(cfg.grid) : std::nullopt);
  warn_grid(spec.family, err);
  const Window w{cfg.delta};
  SolverConfig sc;
  sc.tol = cfg.tol;

  json report = {{"command", "sdp"}, {"setting", cfg.minimax ? "minimax" : "bayesian"}, {"N", spec.family.size()}};
  double gap = 0.0;
  std::optional<PovmGrid> povm;
  if (cfg.minimax) {
    const MinimaxSolution sol = solve_minimax_sdp(spec.family, w, sc);
    gap = sol.gap;
    report["eta_star"] = number_json(sol.eta_bar_star);
    report["gap"] = number_json(sol.gap);
    report.update(stencil_json(cfg, sol.stencil));
    report["iterations"] = sol.iterations;
    json prior = json::array();
    for (double x : sol.prior.weights()) prior.push_back(number_json(x));
    report["prior"] = std::move(prior);
    povm = sol.povm;
  } else {
    const Prior prior = spec.prior ? *spec.prior : Prior::uniform(spec.family.size());
    const SdpSolution sol = solve_bayesian_sdp(spec.family, prior, w, sc);
    gap = sol.duality_gap;
    report["eta_star"] = number_json(sol.eta_star);
    report["gap"] = number_json(sol.duality_gap);
    report.update(stencil_json(cfg, sol.stencil));
    report["iterations"] = sol.iterations;
    povm = sol.povm;
  }
  if (!cfg.povm_path.empty()) {
    write_text_atomic(cfg.povm_path, povm_to_json(*povm).dump(2) + "\n");
    report["povm_path"] = cfg.povm_path;
  } else {
    report["povm_path"] = nullptr;
  }
  emit_json(cfg, out, report);
  if (gap > cfg.tol) {
    err << "duality gap " << format_number(gap) << " exceeds --tol " << format_number(cfg.tol) << '\n';
    return 2;
  }
  return 0;
}

// --------------------------------------------------------------------- bounds

enum class Quantity { kMinimaxEta, kMinimaxError, kBayesianEta, kErrorRate, kSampleComplexity, kTolerance,
                      kCovariantEta, kCovariantError, kCovariantTolerance, kAsymptotic };

const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::kMinimaxEta: return "minimax_eta";
    case Quantity::kMinimaxError: return "minimax_error";
    case Quantity::kBayesianEta: return "bayesian_eta";
    case Quantity::kErrorRate: return "error_rate";
    case Quantity::kSampleComplexity: return "minimax_sample_complexity";
    case Quantity::kTolerance: return "minimax_tolerance";
    case Quantity::kCovariantEta: return "covariant_minimax_eta";
    case Quantity::kCovariantError: return "covariant_minimax_error";
    case Quantity::kCovariantTolerance: return "covariant_minimax_tolerance";
    case Quantity::kAsymptotic: return "asymptotic_minimax_tolerance";
  }
  return "";
}

struct BoundEntry {
  std::string name;
  bool upper = false;
  Quantity quantity = Quantity::kMinimaxEta;
  std::optional<double> value;
  double t = std::numeric_limits<double>::quiet_NaN();
  double t_prime = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  json extra = json::object();
};

json entry_json(const BoundEntry& e) {
  json j = {{"name", e.name}, {"kind", e.upper ? "upper" : "lower"}, {"quantity", quantity_name(e.quantity)}};
  if (!e.value) {
    j["error"] = e.error;
    return j;
  }
  j["value"] = number_json(*e.value);
  if (!std::isnan(e.t)) j["t"] = number_json(e.t);
  if (!std::isnan(e.t_prime)) j["t_prime"] = number_json(e.t_prime);
  for (auto it = e.extra.begin(); it != e.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

template <class F>
BoundEntry try_bound(std::string name, bool upper, Quantity q, F&& f) {
  BoundEntry e;
  e.name = std::move(name);
  e.upper = upper;
  e.quantity = q;
  try {
    f(e);
  } catch (const SolverDiverged&) {
    throw;
  } catch (const Error& ex) {
    e.value.reset();
    e.error = ex.what();
  }
  return e;
}

void set_report(BoundEntry& e, const BoundReport& r) {
  e.value = r.value;
  e.t = r.t;
  e.t_prime = r.t_prime;
}

DensityMatrix average_state(const StateFamily& fam) {
  HermitianOperator acc = HermitianOperator::zero(fam.dim());
  for (const auto& s : fam.states()) acc += s;
  return DensityMatrix(acc * (1.0 / fam.size()));
}

std::vector<double> sample_times(const StateFamily& fam, int max_samples) {
  std::vector<double> t;
  const int N = fam.size();
  const int stride = std::max(1, N / max_samples);
  for (int l = 0; l < N; l += stride) t.push_back(fam.time(l));
  return t;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_family(cfg);
  require_eta_in_unit(cfg);
  FamilySpec spec = load_family(cfg.family_path, cfg.has_grid ? std::optional<int>(cfg.grid) : std::nullopt);
  warn_grid(spec.family, err);
  const StateFamily& fam = spec.family;
  const Window w{cfg.delta};
  const WindowStencil st = snap_window(w, fam.step());
  const Prior prior = spec.prior ? *spec.prior : Prior::uniform(fam.size());
  SolverConfig sc;
  sc.tol = cfg.tol;

  std::vector<BoundEntry> entries;
  entries.push_back(try_bound("two_point", true, Quantity::kMinimaxEta,
                              [&](BoundEntry& e) { set_report(e, two_point_upper_bound(fam, w)); }));
  entries.push_back(try_bound("fidelity", false, Quantity::kMinimaxError,
                              [&](BoundEntry& e) { set_report(e, fidelity_error_lower_bound(fam, w)); }));
  entries.push_back(try_bound("chernoff", true, Quantity::kErrorRate,
                              [&](BoundEntry& e) { set_report(e, chernoff_rate_bound(fam, w)); }));
  entries.push_back(try_bound("two_point_sample_complexity", false, Quantity::kSampleComplexity, [&](BoundEntry& e) {
    set_report(e, two_point_sample_complexity_bound(fam, w, cfg.eta));
  }));
  entries.push_back(try_bound("multishift", true, Quantity::kBayesianEta, [&](BoundEntry& e) {
    const std::vector<Shift> shifts = {{0.5, 0}, {0.5, 2 * st.k}};
    e.value = multishift_ht_bound(fam, prior, w, shifts, sc);
    e.extra["shifts"] = json::array({0, 2 * st.k});
  }));
  entries.push_back(try_bound("hypothesis_testing", false, Quantity::kTolerance, [&](BoundEntry& e) {
    e.value = ht_tolerance_lower_bound(fam, cfg.eta, average_state(fam));
    e.extra["sigma"] = "average";
  }));

  if (spec.probe) {
    const ProbeSpectrum& probe = *spec.probe;
    entries.push_back(try_bound("covariant_two_point", true, Quantity::kCovariantEta, [&](BoundEntry& e) {
      set_report(e, covariant_two_point_upper_bound(probe, cfg.delta));
    }));
    entries.push_back(try_bound("covariant_fidelity", false, Quantity::kCovariantError, [&](BoundEntry& e) {
      set_report(e, covariant_fidelity_error_lower_bound(probe, cfg.delta));
    }));
    entries.push_back(try_bound("covariant_chernoff", true, Quantity::kErrorRate, [&](BoundEntry& e) {
      set_report(e, covariant_chernoff_rate_bound(probe, cfg.delta));
    }));
  }
  if (spec.state_at) {
    entries.push_back(try_bound("cramer_rao", false, Quantity::kCovariantTolerance, [&](BoundEntry& e) {
      const CramerRaoReport r =
          spec.probe ? cramer_rao_like_bound(half_log_fidelity(*spec.probe), {0.0}, cfg.eta)
                     : cramer_rao_like_bound(half_log_fidelity(spec.state_at), sample_times(fam, 16), cfg.eta);
      e.value = r.delta_lb;
      e.extra["q"] = number_json(r.coeffs.q);
      e.extra["gamma"] = number_json(r.gamma);
      e.extra["beyond_radius"] = r.beyond_radius;
    }));
    entries.push_back(try_bound("renyi_asymptote", false, Quantity::kAsymptotic, [&](BoundEntry& e) {
      const RenyiAsymptote r = renyi_tolerance_asymptote(fam, spec.state_at, cfg.eta, 2.0, 1);
      e.value = r.value;
      e.extra["alpha"] = 2;
      e.extra["vacuous"] = r.vacuous;
    }));
  }

  json report = {{"command", "bounds"},
                 {"family", spec.kind},
                 {"N", fam.size()},
                 {"delta_requested", number_json(cfg.delta)},
                 {"delta_snapped", number_json(st.delta)},
                 {"k", st.k},
                 {"eta", number_json(cfg.eta)}};
  json list = json::array();
  for (const auto& e : entries) list.push_back(entry_json(e));
  report["bounds"] = std::move(list);

  if (cfg.exact) {
    json exact = json::object();
    std::vector<std::pair<Quantity, double>> values;
    const MinimaxSolution mm = solve_minimax_sdp(fam, w, sc);
    values.push_back({Quantity::kMinimaxEta, mm.eta_bar_star});
    values.push_back({Quantity::kMinimaxError, 1.0 - mm.eta_bar_star});
    const SdpSolution by = solve_bayesian_sdp(fam, prior, w, sc);
    values.push_back({Quantity::kBayesianEta, by.eta_star});
    try {
      values.push_back({Quantity::kTolerance, optimal_tolerance(fam, Setting::kMinimax, cfg.eta, std::nullopt, sc).delta});
    } catch (const Unreachable&) {
      values.push_back({Quantity::kTolerance, std::numeric_limits<double>::infinity()});
    }
    {
      // n-copy SDPs beyond dimension 8 take minutes.
      const int n_max = std::max(1, static_cast<int>(std::floor(std::log(8.0) / std::log(fam.dim()) + 1e-9)));
      const int n = sample_complexity(fam, Setting::kMinimax, cfg.eta, w, n_max, std::nullopt, sc);
      values.push_back({Quantity::kSampleComplexity,
                        n == kSampleComplexityInfinite ? std::numeric_limits<double>::infinity() : n});
    }
    if (spec.probe) {
      const double eta_cov = covariant_success_probability(*spec.probe, cfg.delta);
      values.push_back({Quantity::kCovariantEta, eta_cov});
      values.push_back({Quantity::kCovariantError, 1.0 - eta_cov});
      values.push_back({Quantity::kCovariantTolerance, covariant_tolerance(*spec.probe, cfg.eta)});
    }
    for (const auto& [q, v] : values) exact[quantity_name(q)] = number_json(v);

    bool consistent = true;
    json checks = json::array();
    for (const auto& e : entries) {
      if (!e.value) continue;
      const auto it = std::find_if(values.begin(), values.end(), [&](const auto& p) { return p.first == e.quantity; });
      if (it == values.end()) continue;
      const bool ok = e.upper ? *e.value >= it->second - kOrderingSlack : *e.value <= it->second + kOrderingSlack;
      consistent = consistent && ok;
      const double slack = e.upper ? *e.value - it->second : it->second - *e.value;
      checks.push_back({{"name", e.name}, {"bound", number_json(*e.value)}, {"exact", number_json(it->second)},
                        {"slack", number_json(slack)}, {"ok", ok}});
    }
    report["exact"] = std::move(exact);
    report["checks"] = std::move(checks);
    report["consistent"] = consistent;
  }
  emit_json(cfg, out, report);
  return 0;
}

// ------------------------------------------------------------------- rate-fit

int cmd_rate_fit(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_delta_in(cfg, std::numbers::pi, "rate-fit");
  const auto probes = probe_list(cfg);
  if (probes.size() != 1 && !cfg.probes.empty()) throw ConfigError("--probe: rate-fit takes a single probe");
  const std::string name = cfg.probes.empty() ? "opt" : probes.front();
  const auto ns = n_list(cfg);
  if (ns.size() < 3) throw ConfigError("--n-range: rate-fit needs at least three n values");
  const auto theory = theory_rate(name, cfg.delta);
  const RateReport r = empirical_rate(
      name, [&](int n) { return probe_by_name(name, n, cfg.delta); }, cfg.delta, ns, theory.value_or(0.0));

  json eta = json::array(), err = json::array();
  for (size_t i = 0; i < r.n_list.size(); ++i) {
    eta.push_back(long_json(1.0L - r.one_minus_eta[i]));
    err.push_back(long_json(r.one_minus_eta[i]));
  }
  json report = {{"command", "rate-fit"},
                 {"probe", r.probe_name},
                 {"delta", number_json(r.delta)},
                 {"n", r.n_list},
                 {"eta", std::move(eta)},
                 {"one_minus_eta", std::move(err)},
                 {"points_used", r.points_used},
                 {"fitted_rate", number_json(r.fitted_rate)}};
  if (theory) {
    report["theory_rate"] = number_json(*theory);
    if (*theory != 0.0) {
      report["relative_deviation"] = number_json(std::abs(r.fitted_rate - *theory) / *theory);
    } else {
      report["relative_deviation"] = nullptr;
      report["absolute_deviation"] = number_json(std::abs(r.fitted_rate));
    }
  } else {
    report["theory_rate"] = nullptr;
    report["relative_deviation"] = nullptr;
  }
  emit_json(cfg, out, report);
  return 0;
}

// ----------------------------------------------------------------------- smap

int cmd_smap(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_family(cfg);
  if (cfg.povm_path.empty()) throw ConfigError("--povm is required (measurement effects)");
  if (cfg.trials < 0) throw ConfigError("--trials: must be nonnegative");
  FamilySpec spec = load_family(cfg.family_path, cfg.has_grid ? std::optional<int>(cfg.grid) : std::nullopt);
  warn_grid(spec.family, err);
  const StateFamily& fam = spec.family;
  const auto measurement = load_measurement(cfg.povm_path);
  const Prior prior = spec.prior ? *spec.prior : Prior::uniform(fam.size());
  const LikelihoodTable table = make_likelihood_table(fam, prior, measurement);
  const Window w{cfg.delta};

  const auto value = [&](const std::vector<int>& s) {
    return cfg.minimax ? strategy_minimax_success_probability(table, fam, w, s)
                       : strategy_success_probability(table, fam, w, s);
  };
  const PostprocessResult res = cfg.minimax ? smcl_postprocess(table, fam, w) : smap_postprocess(table, fam, w);
  const double eta = value(res.strategy);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick(0, fam.size() - 1);
  double best = -std::numeric_limits<double>::infinity(), sum = 0.0;
  std::vector<int> s(res.strategy.size());
  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (int& x : s) x = pick(rng);
    const double v = value(s);
    best = std::max(best, v);
    sum += v;
  }

  json report = {{"command", "smap"},
                 {"setting", cfg.minimax ? "minimax" : "bayesian"},
                 {"method", cfg.minimax ? "smcl" : "smap"},
                 {"N", fam.size()},
                 {"outcomes", table.outcomes()},
                 {"strategy", res.strategy},
                 {"eta", number_json(eta)}};
  if (cfg.minimax) report["eta_bound"] = number_json(res.eta);
  if (cfg.trials > 0) {
    report["random_baseline"] = {{"seed", cfg.seed},
                                 {"trials", cfg.trials},
                                 {"best_eta", number_json(best)},
                                 {"mean_eta", number_json(sum / cfg.trials)},
                                 {"dominated", eta >= best - 1e-12}};
  }
  emit_json(cfg, out, report);
  return 0;
}

// ------------------------------------------------------------------- parsing

void add_common(CLI::App* sub, RunConfig& cfg, std::vector<CLI::Option*>& tracked) {
  tracked.push_back(sub->add_option("--delta", cfg.delta, "window half-width"));
  tracked.push_back(sub->add_option("--eta", cfg.eta, "target success probability"));
  tracked.push_back(sub->add_option("--n", cfg.n, "number of probes / copies"));
  sub->add_option("--n-range", cfg.n_range, "a:b[:step]");
  tracked.push_back(sub->add_option("--grid", cfg.grid, "grid size N for generator families"));
  sub->add_option("--tol", cfg.tol, "solver duality-gap tolerance");
  sub->add_option("--probe", cfg.probes, "comma-separated probe names")->delimiter(',');
  sub->add_option("--family", cfg.family_path, "family JSON file");
  sub->add_option("--povm", cfg.povm_path, "POVM JSON file (output for sdp, input for smap)");
  sub->add_option("--out", cfg.out_path, "output path (default stdout)");
  sub->add_flag("--minimax", cfg.minimax, "minimax setting");
  sub->add_option("--seed", cfg.seed, "seed for randomized baselines");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  apply_thread_cap_from_env();

  CLI::App app{"Tolerance-based metrology toolkit", "pacmet"};
  app.require_subcommand(1);
  RunConfig cfg;
  struct Tracked {
    CLI::App* sub;
    std::vector<CLI::Option*> opts;
  };
  std::vector<Tracked> subs;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"phase-sweep", "closed-form covariant success probabilities per (probe, n)"},
      {"tolerance-sweep", "covariant tolerances at fixed eta, with 1/sqrt(QFI)"},
      {"sdp", "optimal Bayesian or minimax success probability of a family"},
      {"bounds", "two-point, Chernoff, hypothesis-testing and Cramer-Rao-like bounds"},
      {"rate-fit", "fitted error rate of a probe family against theory"},
      {"smap", "SMAP (or SMCL with --minimax) post-processing of a fixed measurement"}};
  for (const auto& [name, help] : commands) {
    Tracked t{app.add_subcommand(name, help), {}};
    add_common(t.sub, cfg, t.opts);
    subs.push_back(std::move(t));
  }
  subs[3].sub->add_flag("--exact", cfg.exact, "also solve exactly and check the ordering");
  subs[5].sub->add_option("--trials", cfg.trials, "random strategies in the baseline");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  for (const auto& t : subs) {
    if (!t.sub->parsed()) continue;
    cfg.command = t.sub->get_name();
    cfg.has_delta = t.opts[0]->count() > 0;
    cfg.has_eta = t.opts[1]->count() > 0;
    cfg.has_n = t.opts[2]->count() > 0;
    cfg.has_grid = t.opts[3]->count() > 0;
  }

  try {
    if (cfg.has_grid && cfg.grid < 2) throw ConfigError("--grid: need at least two points");
    if (!(cfg.tol > 0.0)) throw ConfigError("--tol: must be positive");
    if (cfg.command == "phase-sweep") return cmd_phase_sweep(cfg, out, err);
    if (cfg.command == "tolerance-sweep") return cmd_tolerance_sweep(cfg, out, err);
    if (cfg.command == "sdp") return cmd_sdp(cfg, out, err);
    if (cfg.command == "bounds") return cmd_bounds(cfg, out, err);
    if (cfg.command == "rate-fit") return cmd_rate_fit(cfg, out, err);
    if (cfg.command == "smap") return cmd_smap(cfg, out, err);
    throw ConfigError("unknown command");
  } catch (const SolverDiverged& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pacmet
