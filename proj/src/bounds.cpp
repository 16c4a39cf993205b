#include "pacmet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pacmet {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b), fx = f(x);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe < fx) {
      x = e;
      fx = fe;
    }
  }
  return {x, fx};
}

std::function<bool(int, int)> separated(const StateFamily& fam, const Window& w) {
  const int k = snap_window(w, fam.step()).k;
  return [&fam, k](int l, int m) { return fam.index_distance(l, m) >= 2 * k; };
}

BoundReport report(const std::string& name, const StateFamily& fam, const PairScanResult& r, double value) {
  if (!r.found) throw NoValidPair(name + ": no grid pair is separated by more than twice the tolerance");
  return {name, value, fam.time(r.l), fam.time(r.m)};
}

}  // namespace

double helstrom(const TwoPointInstance& in) {
  if (in.rho.dim() != in.sigma.dim()) throw DimensionMismatch("helstrom: states differ in dimension");
  if (!(in.p >= 0.0 && in.p <= 1.0)) throw DomainError("helstrom: prior weight outside [0, 1]");
  const HermitianOperator diff = in.p * static_cast<const HermitianOperator&>(in.rho) -
                                 (1.0 - in.p) * static_cast<const HermitianOperator&>(in.sigma);
  return 0.5 + 0.5 * trace_norm(diff);
}

std::pair<double, double> minimax_binary_value(const DensityMatrix& rho, const DensityMatrix& sigma) {
  auto [p, v] = golden_min([&](double x) { return helstrom({rho, sigma, x}); }, 0.0, 1.0, 1e-10);
  return {v, p};
}

BoundReport two_point_upper_bound(const StateFamily& fam, const Window& w, Exec exec) {
  const auto r = pair_scan_min(
      fam.size(), separated(fam, w),
      [&](int l, int m) { return minimax_binary_value(fam.state(l), fam.state(m)).first; }, exec);
  return report("two_point_upper_bound", fam, r, r.value);
}

BoundReport fidelity_error_lower_bound(const StateFamily& fam, const Window& w, Exec exec) {
  const auto r = pair_scan_min(
      fam.size(), separated(fam, w), [&](int l, int m) { return -fidelity(fam.state(l), fam.state(m)); }, exec);
  return report("fidelity_error_lower_bound", fam, r, 0.25 * r.value * r.value);
}

BoundReport chernoff_rate_bound(const StateFamily& fam, const Window& w, Exec exec) {
  const auto r = pair_scan_min(
      fam.size(), separated(fam, w),
      [&](int l, int m) { return chernoff_divergence(fam.state(l), fam.state(m)); }, exec);
  // Identical states give log(1 - O(eps)); report those as exactly 0.
  const double floor = 4.0 * std::numeric_limits<double>::epsilon();
  return report("chernoff_rate_bound", fam, r, r.value < floor ? 0.0 : r.value);
}

BoundReport two_point_sample_complexity_bound(const StateFamily& fam, const Window& w, double eta, Exec exec) {
  if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("sample-complexity bound needs eta in [0, 1)");
  const auto r = pair_scan_min(
      fam.size(), separated(fam, w),
      [&](int l, int m) { return sandwiched_renyi(fam.state(l), fam.state(m), 0.5); }, exec);
  const double L = std::log(1.0 / (4.0 * (1.0 - eta)));
  const double floor = 4.0 * std::numeric_limits<double>::epsilon();
  double value = 0.0;
  if (L > 0.0) value = r.value >= floor ? L / r.value : std::numeric_limits<double>::infinity();
  return report("two_point_sample_complexity_bound", fam, r, value);
}

double covariant_overlap(const ProbeSpectrum& probe, double tau) {
  long double re = 0.0L, im = 0.0L;
  const auto& a = probe.precise();
  for (int lam = 0; lam <= probe.n(); ++lam) {
    const long double p = a[lam] * a[lam];
    re += p * std::cos(static_cast<long double>(lam) * tau);
    im -= p * std::sin(static_cast<long double>(lam) * tau);
  }
  return static_cast<double>(std::sqrt(re * re + im * im));
}

namespace {

// Largest overlap over separations tau in [2 delta, pi] (the overlap is even
// about pi), with its location.
std::pair<double, double> covariant_max_overlap(const ProbeSpectrum& probe, double delta) {
  if (!(delta > 0.0 && delta < std::numbers::pi / 2)) {
    throw DeltaOutOfRange("covariant two-point bounds need 0 < delta < pi/2");
  }
  const double lo = 2.0 * delta, hi = std::numbers::pi;
  const int M = 64 * (probe.n() + 1);
  const double h = (hi - lo) / M;
  int best = 0;
  double fbest = -1.0;
  for (int i = 0; i <= M; ++i) {
    const double f = covariant_overlap(probe, lo + i * h);
    if (f > fbest) {
      fbest = f;
      best = i;
    }
  }
  const double a = lo + std::max(0, best - 1) * h, b = lo + std::min(M, best + 1) * h;
  auto [x, fx] = golden_min([&](double tau) { return -covariant_overlap(probe, tau); }, a, b, 1e-12);
  return {x, -fx};
}

}  // namespace

BoundReport covariant_two_point_upper_bound(const ProbeSpectrum& probe, double delta) {
  auto [tau, f] = covariant_max_overlap(probe, delta);
  return {"two_point_upper_bound", 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - f * f))), 0.0, tau};
}

BoundReport covariant_fidelity_error_lower_bound(const ProbeSpectrum& probe, double delta) {
  auto [tau, f] = covariant_max_overlap(probe, delta);
  return {"fidelity_error_lower_bound", 0.25 * f * f, 0.0, tau};
}

BoundReport covariant_chernoff_rate_bound(const ProbeSpectrum& probe, double delta) {
  auto [tau, f] = covariant_max_overlap(probe, delta);
  const double v = f > 0.0 ? -2.0 * std::log(f) : std::numeric_limits<double>::infinity();
  return {"chernoff_rate_bound", v, 0.0, tau};
}

double multishift_ht_bound(const StateFamily& fam, const Prior& prior, const Window& w,
                           const std::vector<Shift>& shifts, const SolverConfig& cfg) {
  if (shifts.empty()) throw InvalidArgument("multishift bound needs at least one shift");
  if (prior.size() != fam.size()) throw GridMismatch("prior and family grids differ in size");
  const int N = fam.size();
  const int k = snap_window(w, fam.step()).k;
  double total_weight = 0.0;
  for (const auto& s : shifts) {
    if (!(s.weight >= 0.0)) throw InvalidArgument("shift weights must be nonnegative");
    total_weight += s.weight;
  }
  if (std::abs(total_weight - 1.0) > 1e-9) throw InvalidArgument("shift weights must sum to 1");
  for (size_t i = 0; i < shifts.size(); ++i) {
    for (size_t j = i + 1; j < shifts.size(); ++j) {
      int d = std::abs(shifts[i].offset - shifts[j].offset);
      if (fam.domain().periodic()) {
        d %= N;
        d = std::min(d, N - d);
      }
      if (d < 2 * k) {
        std::ostringstream os;
        os << "shifts " << shifts[i].offset << " and " << shifts[j].offset << " are closer than " << 2 * k
           << " grid steps";
        throw ShiftOverlap(os.str());
      }
    }
  }

  // Reference points l run over every index for which some shifted point
  // lands on the grid.
  int lo = 0, hi = N;
  if (!fam.domain().periodic()) {
    int smin = shifts[0].offset, smax = shifts[0].offset;
    for (const auto& s : shifts) {
      smin = std::min(smin, s.offset);
      smax = std::max(smax, s.offset);
    }
    lo = -smax;
    hi = N - smin;
  }
  double total = 0.0;
  for (int l = lo; l < hi; ++l) {
    std::vector<HermitianOperator> B;
    double mass = 0.0;
    for (const auto& s : shifts) {
      int m = l + s.offset;
      if (fam.domain().periodic()) {
        m %= N;
        if (m < 0) m += N;
      } else if (m < 0 || m >= N) {
        continue;
      }
      const double c = s.weight * prior[m];
      if (c <= 0.0) continue;
      B.push_back(c * static_cast<const HermitianOperator&>(fam.state(m)));
      mass += c;
    }
    if (B.empty()) continue;
    if (B.size() == 1) {
      total += mass;
      continue;
    }
    total += solve_least_upper_bound(B, cfg).dual;
  }
  return total;
}

double beta_h(const DensityMatrix& rho, const DensityMatrix& sigma, double eta) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("beta_h: states differ in dimension");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("beta_h needs eta in [0, 1]");
  if (eta == 0.0) return 0.0;
  const HermitianOperator& r = rho;
  const HermitianOperator& s = sigma;

  // Greedy Neyman-Pearson test on the spectrum of rho - c sigma: whole
  // eigenvectors in decreasing order, then a fractional weight spread evenly
  // over the boundary eigenspace.
  auto test_cost = [&](double c, double* detect) {
    const EigenDecomposition e = eigh(r - c * s);
    const int n = static_cast<int>(e.values.size());
    std::vector<double> pr(n), ps(n);
    for (int i = 0; i < n; ++i) {
      const CVector v = e.vectors.col(i);
      pr[i] = std::max(0.0, (v.adjoint() * r.matrix() * v)(0).real());
      ps[i] = std::max(0.0, (v.adjoint() * s.matrix() * v)(0).real());
    }
    const double scale = std::max(1.0, std::abs(c));
    double got = 0.0, cost = 0.0;
    int i = n - 1;
    while (i >= 0) {
      int j = i;
      while (j - 1 >= 0 && e.values(i) - e.values(j - 1) <= 1e-12 * scale) --j;
      double gr = 0.0, gs = 0.0;
      for (int u = j; u <= i; ++u) {
        gr += pr[u];
        gs += ps[u];
      }
      if (got + gr >= eta) {
        const double theta = gr > 0.0 ? (eta - got) / gr : 0.0;
        got = eta;
        cost += theta * gs;
        break;
      }
      got += gr;
      cost += gs;
      i = j - 1;
    }
    if (detect) *detect = got;
    return cost;
  };
  // Detection of the strictly positive part of rho - c sigma; decreasing in c.
  auto positive_detect = [&](double c) {
    const EigenDecomposition e = eigh(r - c * s);
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(e.values.size()); ++i) {
      if (e.values(i) > 0.0) {
        const CVector v = e.vectors.col(i);
        acc += (v.adjoint() * r.matrix() * v)(0).real();
      }
    }
    return acc;
  };

  double lo = 0.0, hi = 1.0;
  while (positive_detect(hi) > eta && hi < 1e12) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (positive_detect(mid) > eta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::min(test_cost(lo, nullptr), test_cost(hi, nullptr));
}

double ht_tolerance_lower_bound(const StateFamily& fam, double eta, const DensityMatrix& sigma) {
  double acc = 0.0;
  for (int l = 0; l < fam.size(); ++l) acc += beta_h(fam.state(l), sigma, eta);
  return 0.5 * fam.step() * acc;
}

RenyiAsymptote renyi_tolerance_asymptote(const std::function<DensityMatrix(double)>& state_at,
                                         const std::vector<double>& t_samples, double eta, double alpha, int n) {
  if (!(alpha > 1.0)) throw DomainError("Renyi tolerance asymptote needs alpha > 1");
  if (n < 1) throw DomainError("copy number must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  if (t_samples.empty()) throw InvalidArgument("no sample points");
  RenyiAsymptote out;
  if (eta == 0.0) return out;
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  double info = std::numeric_limits<double>::infinity();
  for (double t : t_samples) {
    const DensityMatrix ref = state_at(t);
    double second;
    try {
      second = (sandwiched_renyi(state_at(t + h), ref, alpha) + sandwiched_renyi(state_at(t - h), ref, alpha)) /
               (h * h);
    } catch (const SupportViolation&) {
      out.vacuous = true;
      return out;
    }
    info = std::min(info, second / alpha);
  }
  out.information = info;
  if (!(info > 0.0)) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = 0.5 * std::pow(eta, alpha / (alpha - 1.0)) *
              std::sqrt(2.0 * std::numbers::pi / (alpha * n * info));
  return out;
}

RenyiAsymptote renyi_tolerance_asymptote(const StateFamily& fam, const std::function<DensityMatrix(double)>& state_at,
                                         double eta, double alpha, int n) {
  return renyi_tolerance_asymptote(state_at, fam.grid(), eta, alpha, n);
}

namespace {

std::vector<double> diagonal_acceptance(const StateFamily& fam, const PovmGrid& povm) {
  if (povm.size() != fam.size()) throw GridMismatch("POVM and family grids differ in size");
  if (povm.dim() != fam.dim()) throw DimensionMismatch("POVM and family dimensions differ");
  std::vector<double> a(fam.size());
  for (int l = 0; l < fam.size(); ++l) a[l] = trace_product(fam.state(l), povm.effect(l));
  return a;
}

}  // namespace

double small_eta_tolerance(const StateFamily& fam, const Prior& prior, const PovmGrid& povm, double eta) {
  if (prior.size() != fam.size()) throw GridMismatch("prior and family grids differ in size");
  const auto diag = diagonal_acceptance(fam, povm);
  double a = 0.0;
  for (int l = 0; l < fam.size(); ++l) a += prior[l] * diag[l];
  a /= fam.step();
  if (!(a > 0.0)) throw ZeroDiagonalAcceptance("the POVM never accepts on the diagonal");
  return 0.5 * eta / a;
}

double small_eta_tolerance_minimax(const StateFamily& fam, const PovmGrid& povm, double eta) {
  const auto diag = diagonal_acceptance(fam, povm);
  const double a = *std::min_element(diag.begin(), diag.end()) / fam.step();
  if (!(a > 0.0)) throw ZeroDiagonalAcceptance("the POVM fails to accept on the diagonal at some grid point");
  return 0.5 * eta / a;
}

namespace {

// N^dagger_l[(w * Q)_l] for every grid point.
std::vector<HermitianOperator> heisenberg_effects(const KrausFamily& channels, Domain domain, const Window& w,
                                                  const PovmGrid& povm) {
  const int N = static_cast<int>(channels.size());
  if (povm.size() != N) throw GridMismatch("POVM and channel grids differ in size");
  const int d_out = povm.dim();
  // Window weights only depend on the grid geometry.
  const StateFamily geometry(domain, std::vector<DensityMatrix>(N, DensityMatrix::maximally_mixed(1)));
  const int k = snap_window(w, geometry.step()).k;
  std::vector<HermitianOperator> out;
  out.reserve(N);
  for (int l = 0; l < N; ++l) {
    const auto& kraus = channels[l];
    if (kraus.empty()) throw KrausIncomplete("empty Kraus list");
    const int d_in = static_cast<int>(kraus.front().cols());
    CMatrix completeness = CMatrix::Zero(d_in, d_in);
    for (const auto& K : kraus) {
      if (K.rows() != d_out || K.cols() != d_in) throw DimensionMismatch("Kraus operator has the wrong shape");
      completeness += K.adjoint() * K;
    }
    if ((completeness - CMatrix::Identity(d_in, d_in)).cwiseAbs().maxCoeff() > 1e-9) {
      std::ostringstream os;
      os << "Kraus operators at grid point " << l << " do not sum to the identity";
      throw KrausIncomplete(os.str());
    }
    CMatrix smeared = CMatrix::Zero(d_out, d_out);
    for (int m = 0; m < N; ++m) {
      const double wt = geometry.window_weight(k, l, m);
      if (wt != 0.0) smeared += wt * povm.effect(m).matrix();
    }
    CMatrix back = CMatrix::Zero(d_in, d_in);
    for (const auto& K : kraus) back += K.adjoint() * smeared * K;
    out.push_back(HermitianOperator::from_hermitian_part(back));
  }
  return out;
}

ProbeOptimization top_eigen(const HermitianOperator& M) {
  const EigenDecomposition e = eigh(M);
  const int top = static_cast<int>(e.values.size()) - 1;
  return {e.vectors.col(top), e.values(top)};
}

}  // namespace

ProbeOptimization probe_optimization_single_use(const KrausFamily& channels, Domain domain, const Prior& prior,
                                                const Window& w, const PovmGrid& povm) {
  const auto eff = heisenberg_effects(channels, domain, w, povm);
  if (prior.size() != static_cast<int>(eff.size())) throw GridMismatch("prior and channel grids differ in size");
  HermitianOperator M = HermitianOperator::zero(eff.front().dim());
  for (size_t l = 0; l < eff.size(); ++l) M += prior[static_cast<int>(l)] * eff[l];
  return top_eigen(M);
}

ProbeOptimization probe_optimization_single_use_minimax(const KrausFamily& channels, Domain domain, const Window& w,
                                                        const PovmGrid& povm) {
  const auto eff = heisenberg_effects(channels, domain, w, povm);
  ProbeOptimization best;
  best.eta = std::numeric_limits<double>::infinity();
  for (const auto& E : eff) {
    ProbeOptimization cand = top_eigen(E);
    if (cand.eta < best.eta) best = std::move(cand);
  }
  return best;
}

}  // namespace pacmet
