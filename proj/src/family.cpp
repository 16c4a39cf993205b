#include "pacmet/family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pacmet {

ProbeSpectrum::ProbeSpectrum(std::vector<double> amps) : amps_(std::move(amps)) {
  if (amps_.empty()) throw InvalidArgument("probe spectrum needs at least one amplitude");
  double norm2 = 0.0;
  for (double a : amps_) {
    if (!(a >= 0.0)) throw InvalidArgument("probe amplitudes must be nonnegative");
    norm2 += a * a;
  }
  if (std::abs(norm2 - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "probe amplitudes have squared norm " << norm2;
    throw InvalidArgument(os.str());
  }
  precise_.assign(amps_.begin(), amps_.end());
}

ProbeSpectrum ProbeSpectrum::normalized(std::vector<double> amps) {
  return normalized(std::vector<long double>(amps.begin(), amps.end()));
}

ProbeSpectrum ProbeSpectrum::normalized(std::vector<long double> amps) {
  if (amps.empty()) throw InvalidArgument("probe spectrum needs at least one amplitude");
  long double norm2 = 0.0L;
  for (long double a : amps) {
    if (!(a >= 0.0L)) throw InvalidArgument("probe amplitudes must be nonnegative");
    norm2 += a * a;
  }
  if (!(norm2 > 0.0L)) throw InvalidArgument("probe amplitudes are all zero");
  const long double inv = 1.0L / std::sqrt(norm2);
  ProbeSpectrum p;
  p.precise_ = std::move(amps);
  p.amps_.reserve(p.precise_.size());
  for (long double& a : p.precise_) {
    a *= inv;
    p.amps_.push_back(static_cast<double>(a));
  }
  return p;
}

double window_hat(const Window& w, double omega) {
  if (omega == 0.0) return w.delta / std::numbers::pi;
  return std::sin(w.delta * omega) / (std::numbers::pi * omega);
}

long double window_hat(long double delta, long double omega) {
  constexpr long double pi = 3.141592653589793238462643383279502884L;
  if (omega == 0.0L) return delta / pi;
  return std::sin(delta * omega) / (pi * omega);
}

WindowStencil snap_window(const Window& w, double step) {
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  const double ratio = w.delta / step;
  const int k = static_cast<int>(std::floor(ratio + 1e-9));
  if (k < 1) {
    std::ostringstream os;
    os << "delta " << w.delta << " is below the grid step " << step;
    throw WindowTooCoarse(os.str());
  }
  return {k, k * step, w.delta - k * step};
}

StateFamily::StateFamily(Domain domain, std::vector<DensityMatrix> states, std::optional<double> lipschitz)
    : domain_(domain), states_(std::move(states)), lipschitz_(lipschitz) {
  if (!(domain_.T > 0.0)) throw InvalidArgument("domain length must be positive");
  if (states_.size() < 2) throw InvalidArgument("a state family needs at least two grid points");
  const int d = states_.front().dim();
  for (const auto& s : states_) {
    if (s.dim() != d) throw DimensionMismatch("all states in a family must share one dimension");
  }
  grid_.resize(states_.size());
  for (int l = 0; l < size(); ++l) grid_[l] = time(l);
  if (lipschitz_) {
    const double est = estimate_lipschitz(*this);
    if (est > *lipschitz_ * (1.0 + 1e-9) + 1e-12) {
      std::ostringstream os;
      os << "supplied Lipschitz constant " << *lipschitz_ << " is below the grid estimate " << est;
      throw DomainError(os.str());
    }
  }
}

double StateFamily::time(int l) const {
  return domain_.periodic() ? l * step() : (l + 0.5) * step();
}

int StateFamily::index_distance(int l, int m) const {
  int d = std::abs(l - m);
  if (domain_.periodic()) d = std::min(d, size() - d);
  return d;
}

double StateFamily::window_weight(int k, int l, int m) const {
  const int d = index_distance(l, m);
  if (d < k) return 1.0;
  if (d > k) return 0.0;
  // Both half cells of the antipode are covered once the window spans the circle.
  if (domain_.periodic() && 2 * k >= size()) return 1.0;
  return 0.5;
}

Prior::Prior(PriorKind kind, std::vector<double> weights) : kind_(kind), weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidArgument("prior needs at least one weight");
  double s = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InvalidArgument("prior weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "prior weights sum to " << s;
    throw InvalidArgument(os.str());
  }
}

Prior Prior::uniform(int N) { return Prior(PriorKind::kUniform, std::vector<double>(N, 1.0 / N)); }

Prior Prior::point_masses(int N, std::span<const int> indices, std::span<const double> weights) {
  if (indices.size() != weights.size()) throw DimensionMismatch("point_masses: sizes differ");
  std::vector<double> w(N, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= N) throw InvalidArgument("point mass index outside grid");
    w[indices[i]] += weights[i];
  }
  return Prior(PriorKind::kPointMass, std::move(w));
}

Prior Prior::tabulated(std::vector<double> weights) {
  const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(s > 0.0)) throw InvalidArgument("tabulated prior has zero mass");
  for (double& w : weights) w /= s;
  return Prior(PriorKind::kTabulated, std::move(weights));
}

Prior Prior::restricted(const std::vector<bool>& mask) const {
  if (static_cast<int>(mask.size()) != size()) throw DimensionMismatch("restriction mask size");
  std::vector<double> w(weights_.size(), 0.0);
  double s = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (mask[l]) {
      w[l] = weights_[l];
      s += w[l];
    }
  }
  if (!(s > 0.0)) throw DomainError("prior has no mass on the restriction set");
  for (double& x : w) x /= s;
  return Prior(PriorKind::kTabulated, std::move(w));
}

StateFamily build_family(Domain domain, int N, const std::function<DensityMatrix(double)>& state_at,
                         std::optional<double> lipschitz) {
  if (N < 2) throw InvalidArgument("grid size must be at least 2");
  std::vector<DensityMatrix> states;
  states.reserve(N);
  const double step = domain.T / N;
  for (int l = 0; l < N; ++l) {
    const double t = domain.periodic() ? l * step : (l + 0.5) * step;
    states.push_back(state_at(t));
  }
  return StateFamily(domain, std::move(states), lipschitz);
}

StateFamily build_unitary_family(std::span<const double> h_eigenvalues, const CVector& psi, int N, Domain domain) {
  if (static_cast<Eigen::Index>(h_eigenvalues.size()) != psi.size()) {
    throw DimensionMismatch("eigenvalue and amplitude counts differ");
  }
  if (domain.periodic()) {
    for (double lam : h_eigenvalues) {
      const double cycles = (lam - h_eigenvalues[0]) * domain.T / (2.0 * std::numbers::pi);
      if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, std::abs(cycles))) {
        std::ostringstream os;
        os << "eigenvalue gap " << lam - h_eigenvalues[0] << " is not periodic with period " << domain.T;
        throw PeriodMismatch(os.str());
      }
    }
  }
  const CVector v = psi / psi.norm();
  return build_family(domain, N, [&](double t) {
    CVector u(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) u(i) = v(i) * std::polar(1.0, -h_eigenvalues[i] * t);
    return DensityMatrix::pure(u);
  });
}

StateFamily build_unitary_family(std::span<const double> h_eigenvalues, const ProbeSpectrum& probe, int N,
                                 double period) {
  CVector psi(probe.n() + 1);
  for (int i = 0; i <= probe.n(); ++i) psi(i) = probe[i];
  return build_unitary_family(h_eigenvalues, psi, N, Domain::periodic(period));
}

DensityMatrix dephasing_state(double omega, double t) {
  const double c = std::cos(omega * t / 2.0), s = std::sin(omega * t / 2.0);
  const double pp = c * c, mm = s * s;
  // |+><+| and |-><-| in the computational basis.
  CMatrix m(2, 2);
  m << 0.5 * (pp + mm), 0.5 * (pp - mm), 0.5 * (pp - mm), 0.5 * (pp + mm);
  return DensityMatrix(m);
}

StateFamily build_dephasing_family(double omega, int N, Domain domain) {
  if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
  if (domain.periodic()) {
    const double cycles = domain.T * omega / (2.0 * std::numbers::pi);
    if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles)) {
      throw PeriodMismatch("dephasing family has period 2 pi / omega");
    }
  }
  return build_family(domain, N, [omega](double t) { return dephasing_state(omega, t); });
}

StateFamily tensor_power_family(const StateFamily& fam, int n) {
  std::vector<DensityMatrix> states;
  states.reserve(fam.size());
  for (const auto& s : fam.states()) states.emplace_back(tensor_power(s, n));
  return StateFamily(fam.domain(), std::move(states));
}

std::vector<HermitianOperator> smear_family(const StateFamily& fam, const Prior& prior, const Window& w) {
  if (prior.size() != fam.size()) throw GridMismatch("prior and family grids differ");
  const int N = fam.size();
  const int k = snap_window(w, fam.step()).k;
  std::vector<HermitianOperator> out(N, HermitianOperator::zero(fam.dim()));
  for (int l = 0; l < N; ++l) {
    CMatrix acc = CMatrix::Zero(fam.dim(), fam.dim());
    auto add = [&](int m) {
      const double wt = fam.window_weight(k, l, m) * prior[m];
      if (wt != 0.0) acc += wt * fam.state(m).matrix();
    };
    if (fam.domain().periodic() && 2 * k >= N) {
      for (int m = 0; m < N; ++m) add(m);
    } else {
      for (int off = -k; off <= k; ++off) {
        int m = l + off;
        if (fam.domain().periodic()) {
          m = ((m % N) + N) % N;
        } else if (m < 0 || m >= N) {
          continue;
        }
        add(m);
      }
    }
    out[l] = HermitianOperator::from_hermitian_part(acc);
  }
  return out;
}

double estimate_lipschitz(const StateFamily& fam) {
  const int N = fam.size();
  const int pairs = fam.domain().periodic() ? N : N - 1;
  double best = 0.0;
  for (int l = 0; l < pairs; ++l) {
    const int m = (l + 1) % N;
    best = std::max(best, trace_norm(fam.state(m) - fam.state(l)) / fam.step());
  }
  return best;
}

LikelihoodTable LikelihoodTable::from_likelihood(std::vector<std::vector<double>> likelihood, const Prior& prior) {
  LikelihoodTable tab;
  const int N = prior.size();
  for (const auto& row : likelihood) {
    if (static_cast<int>(row.size()) != N) throw GridMismatch("likelihood row length differs from prior");
  }
  for (int l = 0; l < N; ++l) {
    double s = 0.0;
    for (const auto& row : likelihood) {
      if (row[l] < -1e-12) throw DomainError("negative likelihood entry");
      s += row[l];
    }
    if (std::abs(s - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "likelihood column " << l << " sums to " << s;
      throw DomainError(os.str());
    }
  }
  tab.likelihood = std::move(likelihood);
  tab.prior = prior.weights();
  const int O = tab.outcomes();
  tab.marginal.assign(O, 0.0);
  tab.posterior.assign(O, {});
  for (int o = 0; o < O; ++o) {
    double nu = 0.0;
    for (int l = 0; l < N; ++l) nu += tab.prior[l] * tab.likelihood[o][l];
    tab.marginal[o] = nu;
    if (nu > 0.0) {
      tab.posterior[o].resize(N);
      for (int l = 0; l < N; ++l) tab.posterior[o][l] = tab.prior[l] * tab.likelihood[o][l] / nu;
    }
  }
  return tab;
}

LikelihoodTable make_likelihood_table(const StateFamily& fam, const Prior& prior,
                                      const std::vector<HermitianOperator>& measurement) {
  if (prior.size() != fam.size()) throw GridMismatch("prior and family grids differ");
  std::vector<std::vector<double>> lik(measurement.size(), std::vector<double>(fam.size()));
  for (std::size_t o = 0; o < measurement.size(); ++o) {
    if (measurement[o].dim() != fam.dim()) throw DimensionMismatch("measurement effect dimension");
    for (int l = 0; l < fam.size(); ++l) lik[o][l] = std::max(0.0, trace_product(fam.state(l), measurement[o]));
  }
  return LikelihoodTable::from_likelihood(std::move(lik), prior);
}

}  // namespace pacmet
