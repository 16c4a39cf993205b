#include "barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace pacmet {

namespace {

constexpr double kCenteringDecrement = 1e-10;  // stop centering at lambda^2/2 below this
constexpr double kLooseDecrement = 1e-3;        // tolerated if the Newton cap is hit
constexpr double kSizeGuard = 5e6;
// Certified gap accepted when numerical stalls stop the path before cfg.tol.
constexpr double kStallGap = 1e-4;

double max_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

// Solves H z = r for symmetric positive (semi)definite H after diagonal
// equilibration, in extended precision.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& h, const Eigen::MatrixXd& r) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const VecL scale = h.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().cast<long double>();
  const MatL hs = scale.asDiagonal() * h.cast<long double>() * scale.asDiagonal();
  const MatL rs = scale.asDiagonal() * r.cast<long double>();
  Eigen::LLT<MatL> llt(hs);
  if (llt.info() == Eigen::Success) return (scale.asDiagonal() * llt.solve(rs)).cast<double>();
  Eigen::LDLT<MatL> ldlt(hs);
  if (ldlt.info() != Eigen::Success) throw SolverDiverged("Newton system is singular");
  return (scale.asDiagonal() * ldlt.solve(rs)).cast<double>();
}

// t Tr X - sum_l log det S_l - sum_i log mu_i.
double barrier_value(double t, const CMatrix& x, const PdInverseBatch& batch, const std::vector<double>* mu) {
  double f = t * x.trace().real();
  for (double ld : batch.logdets) f -= ld;
  if (mu) {
    for (double v : *mu) f -= std::log(v);
  }
  return f;
}

// Backtracking from the full Newton step. Steps no longer than 1/(1 + lambda)
// decrease a self-concordant barrier in exact arithmetic, so they are taken
// once feasible even if rounding hides the decrease.
bool accept_step(double s, double lam, double f_cur, double f_trial) {
  if (lam <= 0.25 || s * (1.0 + lam) <= 1.0) return true;
  return f_trial <= f_cur - 0.25 * s * lam * lam;
}

void check_size(int d, int N) {
  if (static_cast<double>(d) * d * N > kSizeGuard) {
    std::ostringstream os;
    os << "d^2 N = " << static_cast<double>(d) * d * N << " exceeds " << kSizeGuard;
    throw SizeGuard(os.str());
  }
}

}  // namespace

namespace detail {

std::vector<HermitianOperator> normalize_effects(const std::vector<CMatrix>& raw) {
  const Eigen::Index d = raw.front().rows();
  CMatrix s = CMatrix::Zero(d, d);
  for (const auto& q : raw) s += q;
  const HermitianOperator s_inv_half =
      matrix_function(HermitianOperator::from_hermitian_part(s), [](double x) { return 1.0 / std::sqrt(x); },
                      SpectralCutoff::kPseudoInverse);
  std::vector<HermitianOperator> out;
  out.reserve(raw.size());
  for (const auto& q : raw) {
    out.push_back(HermitianOperator::from_hermitian_part(s_inv_half.matrix() * q * s_inv_half.matrix()));
  }
  return out;
}

}  // namespace detail

LeastUpperBound solve_least_upper_bound(const std::vector<HermitianOperator>& B, const SolverConfig& cfg) {
  if (B.empty()) throw InvalidArgument("least upper bound of an empty set");
  const int N = static_cast<int>(B.size());
  const int d = B.front().dim();
  for (const auto& b : B) {
    if (b.dim() != d) throw DimensionMismatch("constraint matrices differ in dimension");
  }
  check_size(d, N);

  double top = 0.0;
  for (const auto& b : B) top = std::max(top, max_eigenvalue(b.matrix()));
  CMatrix X = (1.0 + top) * CMatrix::Identity(d, d);
  const Eigen::VectorXd id_coords = hermitian_coords(CMatrix::Identity(d, d));

  auto slacks_at = [&](const CMatrix& x) {
    std::vector<CMatrix> s(N);
    for (int l = 0; l < N; ++l) s[l] = x - B[l].matrix();
    return s;
  };

  LeastUpperBound out;
  out.primal = -std::numeric_limits<double>::infinity();
  out.dual = std::numeric_limits<double>::infinity();
  double t = cfg.t0;
  PdInverseBatch batch = invert_positive_definite(slacks_at(X), cfg.exec);
  std::string stall;
  int declines = 0;
  for (int outer = 0; outer < cfg.max_outer && stall.empty(); ++outer) {
    double lam2 = 0.0;
    bool centered = false;
    for (int it = 0; it < cfg.max_newton && stall.empty(); ++it) {
      Eigen::VectorXd g = t * id_coords;
      for (const auto& a : batch.inverses) g -= hermitian_coords(a);
      const Eigen::MatrixXd h = barrier_hessian(batch.inverses, cfg.exec);
      Eigen::VectorXd dx;
      try {
        dx = spd_solve(h, -g);
      } catch (const SolverDiverged& e) {
        stall = e.what();
        break;
      }
      lam2 = -g.dot(dx);
      if (lam2 / 2.0 <= kCenteringDecrement) {
        centered = true;
        break;
      }
      const double lam = std::sqrt(std::max(lam2, 0.0));
      const double f_cur = barrier_value(t, X, batch, nullptr);
      double s = 1.0;
      const CMatrix dX = from_hermitian_coords(dx, d);
      for (;;) {
        const CMatrix trial = X + s * dX;
        PdInverseBatch next = invert_positive_definite(slacks_at(trial), cfg.exec);
        if (next.positive && accept_step(s, lam, f_cur, barrier_value(t, trial, next, nullptr))) {
          X = trial;
          batch = std::move(next);
          break;
        }
        s *= 0.5;
        if (s < 1e-14) {
          stall = "no strictly feasible step along the Newton direction";
          break;
        }
      }
      ++out.iterations;
    }
    if (stall.empty() && !centered && lam2 / 2.0 > kLooseDecrement) {
      std::ostringstream os;
      os << "centering at t=" << t << " stalled with Newton decrement " << lam2;
      stall = os.str();
    }

    // Any normalized effects form a POVM and any strictly feasible X bounds
    // the optimum, so both sides are certificates even off the central path.
    std::vector<CMatrix> raw(N);
    for (int l = 0; l < N; ++l) raw[l] = batch.inverses[l] / t;
    std::vector<HermitianOperator> effects = detail::normalize_effects(raw);
    double primal = 0.0;
    for (int l = 0; l < N; ++l) primal += trace_product(effects[l], B[l]);
    const double dual = X.trace().real();
    out.history.push_back({primal, dual});
    if (primal > out.primal) {
      out.primal = primal;
      out.effects = std::move(effects);
      declines = 0;
    } else {
      ++declines;
    }
    if (dual < out.dual) {
      out.dual = dual;
      out.X = HermitianOperator::from_hermitian_part(X);
    }
    if (out.dual - out.primal <= cfg.tol) return out;
    // Past the precision floor the recovered effects only get worse.
    if (declines >= 2 && out.dual - out.primal <= kStallGap) return out;
    t *= cfg.t_factor;
  }
  if (out.dual - out.primal <= kStallGap) return out;
  std::ostringstream os;
  os << (stall.empty() ? std::string("outer iteration cap reached") : stall) << " with gap "
     << out.dual - out.primal;
  throw SolverDiverged(os.str());
}

namespace detail {

JointBarrierResult solve_joint_barrier(const std::vector<DensityMatrix>& states, const CoverLists& cover,
                                       const SolverConfig& cfg) {
  const int N = static_cast<int>(states.size());
  const int d = states.front().dim();
  const int m = d * d;
  if (static_cast<int>(cover.size()) != N) throw DimensionMismatch("cover lists must match the state count");
  check_size(d, N);

  std::vector<double> mu(N, 1.0 / N);
  auto slacks_at = [&](const CMatrix& x, const std::vector<double>& weights) {
    std::vector<CMatrix> s(N);
    for (int l = 0; l < N; ++l) {
      s[l] = x;
      for (const auto& [i, w] : cover[l]) s[l] -= (w * weights[i]) * states[i].matrix();
    }
    return s;
  };

  double top = 0.0;
  {
    const std::vector<CMatrix> s0 = slacks_at(CMatrix::Zero(d, d), mu);
    for (const auto& s : s0) top = std::max(top, max_eigenvalue(-s));
  }
  CMatrix X = (1.0 + top) * CMatrix::Identity(d, d);
  const Eigen::VectorXd id_coords = hermitian_coords(CMatrix::Identity(d, d));

  JointBarrierResult out;
  out.primal = -std::numeric_limits<double>::infinity();
  out.dual = std::numeric_limits<double>::infinity();
  double t = cfg.t0;
  std::string stall;
  int declines = 0;
  PdInverseBatch batch = invert_positive_definite(slacks_at(X, mu), cfg.exec);

  Eigen::MatrixXd coupling(m, N);
  Eigen::MatrixXd mumu(N, N);
  Eigen::VectorXd gmu(N);
  auto assemble_mu_blocks = [&]() {
    // Row i collects sum over effects l covering state i; each row is owned by one thread.
    auto row = [&](int i) {
      CMatrix g_i = CMatrix::Zero(d, d);
      double grad = 0.0;
      for (int j = 0; j < N; ++j) mumu(i, j) = 0.0;
      for (const auto& [l, w_li] : cover[i]) {
        const CMatrix& a = batch.inverses[l];
        const CMatrix ara = a * states[i].matrix() * a;
        g_i += w_li * ara;
        grad += w_li * (a.array() * states[i].matrix().array().transpose()).sum().real();
        for (const auto& [j, w_lj] : cover[l]) {
          mumu(i, j) += w_li * w_lj * (ara.array() * states[j].matrix().array().transpose()).sum().real();
        }
      }
      mumu(i, i) += 1.0 / (mu[i] * mu[i]);
      gmu(i) = grad - 1.0 / mu[i];
      coupling.col(i) = -hermitian_coords(g_i);
    };
    if (cfg.exec == Exec::kSerial) {
      for (int i = 0; i < N; ++i) row(i);
    } else {
#pragma omp parallel for schedule(dynamic, 4)
      for (int i = 0; i < N; ++i) row(i);
    }
  };

  for (int outer = 0; outer < cfg.max_outer && stall.empty(); ++outer) {
    double lam2 = 0.0;
    bool centered = false;
    for (int it = 0; it < cfg.max_newton && stall.empty(); ++it) {
      Eigen::VectorXd gx = t * id_coords;
      for (const auto& a : batch.inverses) gx -= hermitian_coords(a);
      assemble_mu_blocks();
      Eigen::MatrixXd h(m + N, m + N);
      h.topLeftCorner(m, m) = barrier_hessian(batch.inverses, cfg.exec);
      h.topRightCorner(m, N) = coupling;
      h.bottomLeftCorner(N, m) = coupling.transpose();
      h.bottomRightCorner(N, N) = 0.5 * (mumu + mumu.transpose());
      Eigen::VectorXd g(m + N);
      g << gx, gmu;
      Eigen::VectorXd a = Eigen::VectorXd::Zero(m + N);
      a.tail(N).setOnes();

      // Newton step restricted to sum(dmu) = 0.
      Eigen::MatrixXd rhs(m + N, 2);
      rhs.col(0) = g;
      rhs.col(1) = a;
      Eigen::MatrixXd sol;
      try {
        sol = spd_solve(h, rhs);
      } catch (const SolverDiverged& e) {
        stall = e.what();
        break;
      }
      const double multiplier = -a.dot(sol.col(0)) / a.dot(sol.col(1));
      const Eigen::VectorXd dz = -sol.col(0) - multiplier * sol.col(1);
      lam2 = dz.dot(h * dz);
      if (lam2 / 2.0 <= kCenteringDecrement) {
        centered = true;
        break;
      }
      const double lam = std::sqrt(std::max(lam2, 0.0));
      const double f_cur = barrier_value(t, X, batch, &mu);
      double s = 1.0;
      const CMatrix dX = from_hermitian_coords(dz.head(m), d);
      for (;;) {
        std::vector<double> mu_trial(N);
        bool positive = true;
        for (int i = 0; i < N; ++i) {
          mu_trial[i] = mu[i] + s * dz(m + i);
          positive = positive && mu_trial[i] > 0.0;
        }
        if (positive) {
          const CMatrix trial = X + s * dX;
          PdInverseBatch next = invert_positive_definite(slacks_at(trial, mu_trial), cfg.exec);
          if (next.positive && accept_step(s, lam, f_cur, barrier_value(t, trial, next, &mu_trial))) {
            X = trial;
            mu = std::move(mu_trial);
            batch = std::move(next);
            break;
          }
        }
        s *= 0.5;
        if (s < 1e-14) {
          stall = "no strictly feasible step along the Newton direction";
          break;
        }
      }
      ++out.iterations;
    }
    if (stall.empty() && !centered && lam2 / 2.0 > kLooseDecrement) {
      std::ostringstream os;
      os << "minimax centering at t=" << t << " stalled with Newton decrement " << lam2;
      stall = os.str();
    }

    std::vector<CMatrix> raw(N);
    for (int l = 0; l < N; ++l) raw[l] = batch.inverses[l] / t;
    std::vector<HermitianOperator> effects = normalize_effects(raw);
    std::vector<double> acceptance(N, 0.0);
    for (int i = 0; i < N; ++i) {
      for (const auto& [l, w] : cover[i]) acceptance[i] += w * trace_product(states[i], effects[l]);
    }
    const double primal = *std::min_element(acceptance.begin(), acceptance.end());
    const double dual = X.trace().real();
    out.history.push_back({primal, dual});
    if (primal > out.primal) {
      out.primal = primal;
      out.effects = std::move(effects);
      out.acceptance = std::move(acceptance);
      declines = 0;
    } else {
      ++declines;
    }
    if (dual < out.dual) {
      out.dual = dual;
      out.X = HermitianOperator::from_hermitian_part(X);
      out.mu = mu;
    }
    if (out.dual - out.primal <= cfg.tol) return out;
    // Past the precision floor the recovered effects only get worse.
    if (declines >= 2 && out.dual - out.primal <= kStallGap) return out;
    t *= cfg.t_factor;
  }
  if (out.dual - out.primal <= kStallGap) return out;
  std::ostringstream os;
  os << (stall.empty() ? std::string("minimax outer iteration cap reached") : stall) << " with gap "
     << out.dual - out.primal;
  throw SolverDiverged(os.str());
}

}  // namespace detail

}  // namespace pacmet
