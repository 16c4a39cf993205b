#include "pacmet/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pacmet {

namespace {

constexpr long double kPiL = 3.141592653589793238462643383279502884L;

void require_delta(double delta, double upper, const char* what) {
  if (!(delta > 0.0) || !(delta < upper)) {
    std::ostringstream os;
    os << what << ": delta " << delta << " outside (0, " << upper << ")";
    throw DeltaOutOfRange(os.str());
  }
}

long double eta_from_autocorrelation(const std::vector<long double>& c, long double delta) {
  long double sum = window_hat(delta, 0.0L) * c[0];
  long double comp = 0.0L;
  for (std::size_t w = 1; w < c.size(); ++w) {
    const long double y = 2.0L * window_hat(delta, static_cast<long double>(w)) * c[w] - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

int sturm_count_below(const SlepianTridiagonal& t, long double x) {
  const std::size_t m = t.diag.size();
  int count = 0;
  long double q = t.diag[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (q == 0.0L) q = -std::numeric_limits<long double>::epsilon() * (std::abs(x) + 1.0L);
    if (q < 0.0L) ++count;
    if (i + 1 >= m) break;
    q = (t.diag[i + 1] - x) - t.offdiag[i] * t.offdiag[i] / q;
  }
  return count;
}

// Solves (T - shift I) y = b in place by LU with partial pivoting.
void tridiagonal_solve(const SlepianTridiagonal& t, long double shift, std::vector<long double>& b) {
  const std::size_t m = t.diag.size();
  if (m == 1) {
    long double piv = t.diag[0] - shift;
    if (piv == 0.0L) piv = std::numeric_limits<long double>::min();
    b[0] /= piv;
    return;
  }
  std::vector<long double> d(m), dl(t.offdiag), du(t.offdiag), du2(m, 0.0L);
  std::vector<char> swapped(m, 0);
  for (std::size_t i = 0; i < m; ++i) d[i] = t.diag[i] - shift;
  const long double tiny = std::numeric_limits<long double>::epsilon() * (std::abs(shift) + 1.0L);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0L) d[i] = tiny;
      const long double fact = dl[i] / d[i];
      dl[i] = fact;
      d[i + 1] -= fact * du[i];
    } else {
      const long double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const long double temp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = temp - fact * d[i + 1];
      if (i + 2 < m) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
      swapped[i] = 1;
    }
  }
  if (d[m - 1] == 0.0L) d[m - 1] = tiny;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (swapped[i]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= dl[i] * b[i];
  }
  b[m - 1] /= d[m - 1];
  b[m - 2] = (b[m - 2] - du[m - 2] * b[m - 1]) / d[m - 2];
  for (std::size_t i = m - 2; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
}

std::vector<long double> tridiagonal_top_eigenvector(const SlepianTridiagonal& t) {
  const std::size_t m = t.diag.size();
  if (m == 1) return {1.0L};
  long double lo = t.diag[0], hi = t.diag[0];
  for (std::size_t i = 0; i < m; ++i) {
    const long double r = (i > 0 ? std::abs(t.offdiag[i - 1]) : 0.0L) + (i + 1 < m ? std::abs(t.offdiag[i]) : 0.0L);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const long double eps = std::numeric_limits<long double>::epsilon();
  for (int it = 0; it < 400 && hi - lo > 4.0L * eps * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (sturm_count_below(t, mid) == static_cast<int>(m)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const long double lambda = 0.5L * (lo + hi);
  std::vector<long double> v(m, 1.0L);
  for (int it = 0; it < 4; ++it) {
    tridiagonal_solve(t, lambda, v);
    long double norm2 = 0.0L;
    for (long double x : v) norm2 += x * x;
    const long double inv = 1.0L / std::sqrt(norm2);
    for (long double& x : v) x *= inv;
  }
  return v;
}

ProbeSpectrum support_checked(const ProbeSpectrum& probe, std::vector<int>& support) {
  support.clear();
  for (int lam = 0; lam <= probe.n(); ++lam) {
    if (probe.precise()[lam] > 0.0L) support.push_back(lam);
  }
  return probe;
}

}  // namespace

ProbeSpectrum probe_ghz(int n) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  std::vector<long double> a(n + 1, 0.0L);
  a[0] = 1.0L;
  a[n] = 1.0L;
  return ProbeSpectrum::normalized(std::move(a));
}

ProbeSpectrum probe_plus_tensor(int n) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  std::vector<long double> a(n + 1);
  const long double ln2 = std::log(2.0L);
  for (int lam = 0; lam <= n; ++lam) {
    const long double log_binom = std::lgamma(n + 1.0L) - std::lgamma(lam + 1.0L) - std::lgamma(n - lam + 1.0L);
    a[lam] = std::exp(0.5L * (log_binom - n * ln2));
  }
  return ProbeSpectrum::normalized(std::move(a));
}

ProbeSpectrum probe_hb(int n) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  return ProbeSpectrum::normalized(std::vector<long double>(n + 1, 1.0L));
}

ProbeSpectrum probe_gaussian(int n, double delta) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  if (!(delta > 0.0)) throw InvalidArgument("Gaussian probe needs delta > 0");
  std::vector<long double> a(n + 1);
  const long double c = static_cast<long double>(delta) / (n + 1);
  for (int lam = 0; lam <= n; ++lam) {
    const long double x = lam - 0.5L * n;
    a[lam] = std::exp(-c * x * x);
  }
  return ProbeSpectrum::normalized(std::move(a));
}

bool is_probe_name(const std::string& name) {
  return name == "ghz" || name == "plus" || name == "hb" || name == "gauss" || name == "opt" || name == "bessel";
}

ProbeSpectrum probe_by_name(const std::string& name, int n, double delta) {
  if (name == "ghz") return probe_ghz(n);
  if (name == "plus") return probe_plus_tensor(n);
  if (name == "hb") return probe_hb(n);
  if (name == "gauss") return probe_gaussian(n, delta);
  if (name == "opt") return optimal_probe(n, delta).probe;
  if (name == "bessel") return dpss_bessel_approx(n, delta);
  throw InvalidArgument("unknown probe '" + name + "'");
}

double covariant_success_probability(const ProbeSpectrum& probe, double delta) {
  require_delta(delta, std::numbers::pi, "covariant_success_probability");
  const auto c = autocorrelation(probe.precise(), Exec::kParallel);
  return static_cast<double>(eta_from_autocorrelation(c, delta));
}

long double covariant_error_probability(const ProbeSpectrum& probe, double delta, Exec exec) {
  require_delta(delta, std::numbers::pi, "covariant_error_probability");
  const int panels = probe.n() + 8;
  return arc_power_integral(probe.precise(), delta, kPiL, panels, exec) / kPiL;
}

double covariant_success_probability_reference(const ProbeSpectrum& probe, double delta) {
  require_delta(delta, std::numbers::pi, "covariant_success_probability_reference");
  const Eigen::MatrixXd w = prolate_matrix(probe.n(), delta);
  const Eigen::Map<const Eigen::VectorXd> a(probe.amps().data(), probe.n() + 1);
  return a.dot(w * a);
}

Eigen::MatrixXd prolate_matrix(int n, double delta) {
  Eigen::MatrixXd w(n + 1, n + 1);
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) w(a, b) = window_hat(Window{delta}, a - b);
  }
  return w;
}

SlepianTridiagonal slepian_tridiagonal(int n, double delta) {
  SlepianTridiagonal t;
  t.diag.resize(n + 1);
  t.offdiag.resize(n);
  const long double c = std::cos(static_cast<long double>(delta));
  for (int lam = 0; lam <= n; ++lam) {
    const long double x = 0.5L * n - lam;
    t.diag[lam] = x * x * c;
    if (lam < n) t.offdiag[lam] = 0.5L * (lam + 1.0L) * (n - lam);
  }
  return t;
}

OptimalProbe optimal_probe(int n, double delta) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  require_delta(delta, std::numbers::pi / 2.0, "optimal_probe");
  std::vector<long double> v = tridiagonal_top_eigenvector(slepian_tridiagonal(n, delta));
  long double sum = 0.0L;
  for (long double x : v) sum += x;
  if (sum < 0.0L) {
    for (long double& x : v) x = -x;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < -1e-8L) {
      std::ostringstream os;
      os << "entry " << i << " of the top eigenvector is " << static_cast<double>(v[i]);
      throw PositivityViolation(os.str());
    }
    v[i] = std::max(v[i], 0.0L);
  }
  OptimalProbe out{ProbeSpectrum::normalized(std::move(v)), 0.0, 0.0L};
  out.eta_star = covariant_success_probability(out.probe, delta);
  out.one_minus_eta = covariant_error_probability(out.probe, delta);
  return out;
}

Eigen::VectorXd prolate_top_eigenvector(int n, double delta) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prolate_matrix(n, delta));
  Eigen::VectorXd v = es.eigenvectors().col(n);
  if (v.sum() < 0.0) v = -v;
  return v;
}

ProbeSpectrum dpss_bessel_approx(int n, double delta) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  require_delta(delta, std::numbers::pi / 2.0, "dpss_bessel_approx");
  std::vector<long double> a(n + 1);
  for (int lam = 0; lam <= n; ++lam) {
    const double u = (2.0 * lam + 1.0) / (n + 1.0) - 1.0;
    const double x = 0.5 * delta * n * std::sqrt(std::max(0.0, 1.0 - u * u));
    a[lam] = std::cyl_bessel_i(0.0, x);
  }
  return ProbeSpectrum::normalized(std::move(a));
}

double covariant_tolerance(const ProbeSpectrum& probe, double eta_target) {
  if (!(eta_target > 0.0)) return 0.0;
  if (eta_target >= 1.0) throw Unreachable("success probability 1 needs the full period");
  const auto c = autocorrelation(probe.precise(), Exec::kParallel);
  long double lo = 0.0L, hi = kPiL;
  while (hi - lo > 1e-13L) {
    const long double mid = 0.5L * (lo + hi);
    if (eta_from_autocorrelation(c, mid) >= eta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return static_cast<double>(hi);
}

double optimal_covariant_tolerance(int n, double eta_target) {
  if (!(eta_target > 0.0)) return 0.0;
  double lo = 0.0, hi = std::numbers::pi / 2.0;
  const double top = std::nextafter(hi, 0.0);
  if (optimal_probe(n, top).eta_star < eta_target) throw Unreachable("target needs delta beyond pi/2");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid > 0.0 && optimal_probe(n, mid).eta_star >= eta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::min(hi, top);
}

double parallel_rate_theory(double delta) {
  require_delta(delta, std::numbers::pi / 2.0, "parallel_rate_theory");
  const double s = std::sin(delta / 2.0);
  return std::log1p(s) - std::log1p(-s);
}

double iid_rate_theory(double delta) {
  require_delta(delta, std::numbers::pi / 2.0, "iid_rate_theory");
  const double c = std::cos(delta);
  return -std::log(c * c);
}

double gaussian_rate_theory(double delta) {
  if (!(delta >= 0.0)) throw DeltaOutOfRange("gaussian_rate_theory: delta must be nonnegative");
  return delta / 2.0;
}

RateReport empirical_rate(const std::string& probe_name, const std::function<ProbeSpectrum(int)>& probe_family,
                          double delta, const std::vector<int>& n_list, double theory_rate) {
  if (n_list.size() < 3) throw InvalidArgument("rate fit needs at least three n values");
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw InvalidArgument("n values must be ascending");
  RateReport r;
  r.probe_name = probe_name;
  r.delta = delta;
  r.theory_rate = theory_rate;
  r.n_list = n_list;
  int usable = 0;
  bool truncated = false;
  for (int n : n_list) {
    const long double err = covariant_error_probability(probe_family(n), delta);
    r.one_minus_eta.push_back(err);
    r.eta_list.push_back(static_cast<double>(1.0L - err));
    if (!truncated && err > kRateFloor) {
      ++usable;
    } else {
      truncated = true;
    }
  }
  if (usable < 2) throw Saturated("error probability below the resolvable floor at all but one n");
  const int start = usable / 2;
  const int count = usable - start;
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = start; i < usable; ++i) {
    const long double x = n_list[i];
    const long double y = -std::log(r.one_minus_eta[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const long double denom = count * sxx - sx * sx;
  if (denom == 0.0L) throw InvalidArgument("rate fit needs distinct n values");
  r.fitted_rate = static_cast<double>((count * sxy - sx * sy) / denom);
  r.points_used = count;
  return r;
}

StateFamily covariant_family(const ProbeSpectrum& probe, int N) {
  std::vector<int> support;
  support_checked(probe, support);
  std::vector<double> eigs;
  CVector psi(static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    eigs.push_back(support[j]);
    psi(static_cast<Eigen::Index>(j)) = probe[support[j]];
  }
  return build_unitary_family(eigs, psi, N, Domain::periodic(2.0 * std::numbers::pi));
}

PovmGrid pgm_grid_povm(const ProbeSpectrum& probe, int N) {
  if (N <= probe.n()) throw InvalidArgument("PGM grid needs more points than the spectral width");
  std::vector<int> support;
  support_checked(probe, support);
  const auto s = static_cast<Eigen::Index>(support.size());
  std::vector<HermitianOperator> effects;
  std::vector<double> predictions;
  effects.reserve(N);
  for (int l = 0; l < N; ++l) {
    const double t = 2.0 * std::numbers::pi * l / N;
    CVector chi(s);
    for (Eigen::Index j = 0; j < s; ++j) chi(j) = std::polar(1.0, -support[j] * t);
    effects.push_back(HermitianOperator::projector(chi) * (1.0 / N));
    predictions.push_back(t);
  }
  return PovmGrid(std::move(effects), std::move(predictions));
}

double gaussian_tolerance_asymptote(double eta_bar, int n) {
  if (!(eta_bar > 0.0 && eta_bar < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  const double alpha = 2.0 * std::log(2.0 / (std::numbers::pi * (1.0 - eta_bar)));
  return alpha / (n + 1.0);
}

int covariant_sample_complexity(const std::function<ProbeSpectrum(int)>& probe_family, double delta,
                                double eta_target, int n_max) {
  for (int n = 1; n <= n_max; ++n) {
    if (covariant_success_probability(probe_family(n), delta) >= eta_target) return n;
  }
  return kSampleComplexityInfinite;
}

}  // namespace pacmet
