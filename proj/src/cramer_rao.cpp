#include "pacmet/cramer_rao.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <boost/math/special_functions/lambert_w.hpp>

#include "pacmet/kernels.hpp"

namespace pacmet {

HalfLogFidelity half_log_fidelity(std::function<DensityMatrix(double)> state_at) {
  return [state_at = std::move(state_at)](double t, double tau) {
    const double f = fidelity(state_at(t), state_at(t + tau));
    return f > 0.0 ? -0.5 * std::log(f) : std::numeric_limits<double>::infinity();
  };
}

HalfLogFidelity half_log_fidelity(const ProbeSpectrum& probe) {
  std::vector<long double> p(probe.precise().size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = probe.precise()[i] * probe.precise()[i];
  auto c = std::make_shared<const std::vector<long double>>(autocorrelation(p, Exec::kSerial));
  return [c](double, double tau) {
    long double x = 0.0L;
    for (size_t w = 1; w < c->size(); ++w) {
      const long double s = std::sin(0.5L * static_cast<long double>(w) * tau);
      x += (*c)[w] * s * s;
    }
    x *= 4.0L;
    if (x >= 1.0L) return std::numeric_limits<double>::infinity();
    return static_cast<double>(-0.25L * std::log1p(-x));
  };
}

namespace {

// Fornberg weights for derivatives 0..m at z on nodes x; c[i][k].
std::vector<std::vector<double>> fornberg(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

double central_difference(const HalfLogFidelity& g, double t, int k, double h) {
  const int m = (k + 1) / 2;
  std::vector<double> nodes;
  for (int i = -m; i <= m; ++i) nodes.push_back(i);
  const auto c = fornberg(0.0, nodes, k);
  double acc = 0.0;
  for (int i = 0; i <= 2 * m; ++i) {
    if (c[i][k] != 0.0) acc += c[i][k] * g(t, nodes[i] * h);
  }
  return acc / std::pow(h, k);
}

}  // namespace

double log_fidelity_derivative(const HalfLogFidelity& g, double t, int k, double scale) {
  if (k < 1) throw DomainError("derivative order must be positive");
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2)) * scale;
  const double coarse = central_difference(g, t, k, h);
  const double fine = central_difference(g, t, k, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

double cramer_rao_gamma_exact(double q, double eta_bar) {
  if (!(eta_bar > 0.75 && eta_bar < 1.0)) throw DomainError("the equality case needs 3/4 < eta < 1");
  const double a = std::log(1.0 / (4.0 * (1.0 - eta_bar))) / 4.0;
  const double u = a * q * q;
  double gamma;
  if (u < 1e-8) {
    gamma = std::sqrt(2.0 * a) - a * q / 3.0;
  } else {
    const double w = boost::math::lambert_wm1(-std::exp(-1.0 - u));
    gamma = -(1.0 + u + w) / q;
  }
  return std::sqrt(2.0) * gamma;
}

CramerRaoReport cramer_rao_like_bound(const HalfLogFidelity& g, const std::vector<double>& t_samples, double eta_bar,
                                      const CramerRaoOptions& opts) {
  if (!(eta_bar > 0.75 && eta_bar < 1.0)) throw DomainError("the Cramer-Rao-like bound needs 3/4 < eta < 1");
  if (opts.pmax < 4) throw DomainError("pmax must be at least 4");
  if (t_samples.empty()) throw InvalidArgument("no sample points");

  double scale = opts.scale;
  if (scale <= 0.0) {
    double f2max = 0.0;
    for (double t : t_samples) f2max = std::max(f2max, log_fidelity_derivative(g, t, 2, 1.0));
    scale = f2max > 0.0 ? std::clamp(1.0 / std::sqrt(8.0 * f2max), 1e-6, 1.0) : 1.0;
  }

  CramerRaoReport out;
  CrCoefficients& co = out.coeffs;
  co.t = t_samples;
  out.min_f2 = std::numeric_limits<double>::infinity();
  for (double t : t_samples) {
    std::vector<double> f;
    for (int k = 2; k <= opts.pmax; ++k) f.push_back(log_fidelity_derivative(g, t, k, scale));
    const double f2 = f[0];
    if (!(f2 > 0.0)) throw DomainError("vanishing Fisher information at a sample point");
    out.min_f2 = std::min(out.min_f2, f2);
    for (int p = 3; p <= opts.pmax; ++p) {
      co.q = std::max(co.q, std::pow(std::abs(f[p - 2] / std::pow(f2, 0.5 * p)), 1.0 / (p - 2)));
    }
    co.f.push_back(std::move(f));
  }

  const double L = std::log(1.0 / (4.0 * (1.0 - eta_bar)));
  co.gamma_bracket = {std::sqrt(L) - co.q * L / (6.0 * std::sqrt(2.0)), std::sqrt(L)};
  out.gamma = co.gamma_bracket.first;
  out.negative_gamma = out.gamma <= 0.0;
  out.delta_lb = out.negative_gamma ? 0.0 : out.gamma / std::sqrt(8.0 * out.min_f2);
  if (opts.exact_gamma) out.gamma_exact = cramer_rao_gamma_exact(co.q, eta_bar);

  // First separation where the fidelity drops to 1e-8.
  const double g_zero = -0.5 * std::log(1e-8);
  const int steps = 2048;
  out.r_est = std::numeric_limits<double>::infinity();
  for (double t : t_samples) {
    for (int i = 1; i <= steps; ++i) {
      const double tau = opts.tau_max * i / steps;
      if (tau >= out.r_est) break;
      if (g(t, tau) >= g_zero) {
        out.r_est = tau;
        break;
      }
    }
  }
  out.beyond_radius = out.delta_lb > out.r_est;
  return out;
}

}  // namespace pacmet
