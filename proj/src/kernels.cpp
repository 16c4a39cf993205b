#include "pacmet/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <omp.h>

namespace pacmet {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

void accumulate_coords(const CMatrix& m, double scale, double* out) {
  const int d = static_cast<int>(m.rows());
  for (int i = 0; i < d; ++i) out[i] += scale * m(i, i).real();
  int idx = d;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      out[idx] += scale * kSqrt2 * m(i, j).real();
      out[idx + 1] += scale * kSqrt2 * m(i, j).imag();
      idx += 2;
    }
  }
}

// Column b of the Hessian; `work` is caller-owned scratch.
void hessian_column(const std::vector<CMatrix>& inverses, int b, int d, const std::vector<std::pair<int, int>>& basis,
                    CMatrix& work, double* col) {
  const auto [i, j] = basis[b];
  const bool diag = b < d;
  const bool real_part = !diag && ((b - d) % 2 == 0);
  const cplx isq2(0.0, 1.0 / kSqrt2);
  for (const CMatrix& a : inverses) {
    if (diag) {
      work.noalias() = a.col(i) * a.row(i);
    } else if (real_part) {
      work.noalias() = (a.col(i) * a.row(j) + a.col(j) * a.row(i)) / kSqrt2;
    } else {
      work.noalias() = isq2 * (a.col(i) * a.row(j) - a.col(j) * a.row(i));
    }
    accumulate_coords(work, 1.0, col);
  }
}

std::vector<std::pair<int, int>> hermitian_basis(int d) {
  std::vector<std::pair<int, int>> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) basis.emplace_back(i, i);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      basis.emplace_back(i, j);
      basis.emplace_back(i, j);
    }
  }
  return basis;
}

struct KahanSum {
  long double sum = 0.0L;
  long double comp = 0.0L;
  void add(long double x) {
    const long double y = x - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

int apply_thread_cap_from_env() {
  if (const char* env = std::getenv("PACMET_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) omp_set_num_threads(cap);
    } catch (const std::exception&) {
      // Ignore malformed values and keep the OpenMP default.
    }
  }
  return omp_get_max_threads();
}

Eigen::VectorXd hermitian_coords(const CMatrix& m) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.rows() * m.rows());
  accumulate_coords(m, 1.0, out.data());
  return out;
}

CMatrix from_hermitian_coords(const Eigen::VectorXd& x, int dim) {
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) m(i, i) = x(i);
  int idx = dim;
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const cplx v(x(idx) / kSqrt2, x(idx + 1) / kSqrt2);
      m(i, j) = v;
      m(j, i) = std::conj(v);
      idx += 2;
    }
  }
  return m;
}

Eigen::MatrixXd barrier_hessian(const std::vector<CMatrix>& inverses, Exec exec) {
  if (inverses.empty()) return {};
  const int d = static_cast<int>(inverses.front().rows());
  const int m = d * d;
  const auto basis = hermitian_basis(d);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  if (exec == Exec::kSerial) {
    CMatrix work(d, d);
    for (int b = 0; b < m; ++b) hessian_column(inverses, b, d, basis, work, h.col(b).data());
  } else {
#pragma omp parallel
    {
      CMatrix work(d, d);
#pragma omp for schedule(static)
      for (int b = 0; b < m; ++b) hessian_column(inverses, b, d, basis, work, h.col(b).data());
    }
  }
  return 0.5 * (h + h.transpose());
}

PdInverseBatch invert_positive_definite(const std::vector<CMatrix>& slacks, Exec exec) {
  const int N = static_cast<int>(slacks.size());
  PdInverseBatch out;
  out.inverses.resize(N);
  out.logdets.assign(N, 0.0);
  std::vector<char> ok(N, 1);
  auto one = [&](int l) {
    Eigen::LLT<CMatrix> llt(slacks[l]);
    if (llt.info() != Eigen::Success) {
      ok[l] = 0;
      return;
    }
    const CMatrix& lmat = llt.matrixLLT();
    double ld = 0.0;
    for (Eigen::Index i = 0; i < lmat.rows(); ++i) {
      const double di = lmat(i, i).real();
      if (!(di > 0.0)) {
        ok[l] = 0;
        return;
      }
      ld += 2.0 * std::log(di);
    }
    out.logdets[l] = ld;
    CMatrix inv = llt.solve(CMatrix::Identity(slacks[l].rows(), slacks[l].cols()));
    out.inverses[l] = 0.5 * (inv + inv.adjoint());
  };
  if (exec == Exec::kSerial) {
    for (int l = 0; l < N; ++l) one(l);
  } else {
#pragma omp parallel for schedule(static)
    for (int l = 0; l < N; ++l) one(l);
  }
  for (char c : ok) out.positive = out.positive && c;
  return out;
}

std::vector<long double> autocorrelation(std::span<const long double> amps, Exec exec) {
  const int n1 = static_cast<int>(amps.size());
  std::vector<long double> c(n1, 0.0L);
  std::vector<int> support;
  for (int lam = 0; lam < n1; ++lam) {
    if (amps[lam] != 0.0L) support.push_back(lam);
  }
  if (4 * support.size() < static_cast<size_t>(n1)) {
    // Sparse spectra (GHZ and friends): loop over support pairs only.
    for (size_t i = 0; i < support.size(); ++i) {
      for (size_t j = i; j < support.size(); ++j) c[support[j] - support[i]] += amps[support[i]] * amps[support[j]];
    }
    return c;
  }
  auto lag = [&](int w) {
    KahanSum s;
    for (int lam = 0; lam + w < n1; ++lam) s.add(amps[lam] * amps[lam + w]);
    c[w] = s.sum;
  };
  if (exec == Exec::kSerial) {
    for (int w = 0; w < n1; ++w) lag(w);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (int w = 0; w < n1; ++w) lag(w);
  }
  return c;
}

long double arc_power_integral(std::span<const long double> amps, long double lo, long double hi, int panels,
                               Exec exec) {
  using Rule = boost::math::quadrature::gauss<long double, 20>;
  const auto& x = Rule::abscissa();
  const auto& wts = Rule::weights();
  const long double h = (hi - lo) / panels;
  std::vector<long double> partial(panels, 0.0L);
  auto power_at = [&](long double t) {
    // Horner in e^{it}: |sum a_lambda z^lambda| with z on the unit circle.
    const long double cr = std::cos(t), ci = std::sin(t);
    long double re = 0.0L, im = 0.0L;
    for (auto it = amps.rbegin(); it != amps.rend(); ++it) {
      const long double nre = re * cr - im * ci + *it;
      const long double nim = re * ci + im * cr;
      re = nre;
      im = nim;
    }
    return re * re + im * im;
  };
  auto panel = [&](int p) {
    const long double mid = lo + (p + 0.5L) * h;
    const long double half = 0.5L * h;
    KahanSum s;
    for (std::size_t q = 0; q < x.size(); ++q) {
      if (x[q] == 0.0L) {
        s.add(wts[q] * power_at(mid));
      } else {
        s.add(wts[q] * power_at(mid - half * x[q]));
        s.add(wts[q] * power_at(mid + half * x[q]));
      }
    }
    partial[p] = s.sum * half;
  };
  if (exec == Exec::kSerial) {
    for (int p = 0; p < panels; ++p) panel(p);
  } else {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < panels; ++p) panel(p);
  }
  KahanSum total;
  for (long double v : partial) total.add(v);
  return total.sum;
}

PairScanResult pair_scan_min(int N, const std::function<bool(int, int)>& valid,
                             const std::function<double(int, int)>& value, Exec exec) {
  std::vector<PairScanResult> rows(N);
  auto row = [&](int l) {
    PairScanResult r;
    for (int m = l + 1; m < N; ++m) {
      if (!valid(l, m)) continue;
      const double v = value(l, m);
      if (!r.found || v < r.value) r = {true, v, l, m};
    }
    rows[l] = r;
  };
  if (exec == Exec::kSerial) {
    for (int l = 0; l < N; ++l) row(l);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int l = 0; l < N; ++l) row(l);
  }
  PairScanResult best;
  for (const auto& r : rows) {
    if (r.found && (!best.found || r.value < best.value)) best = r;
  }
  return best;
}

}  // namespace pacmet
