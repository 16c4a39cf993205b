// Serial vs OpenMP timings for the hot kernels. Also checks that both
// variants agree bit for bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "pacmet/kernels.hpp"

using namespace pacmet;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

template <class R>
void row(const char* name, int reps, const std::function<R(Exec)>& run) {
  R serial{}, parallel{};
  const double ts = seconds([&] { serial = run(Exec::kSerial); }, reps);
  const double tp = seconds([&] { parallel = run(Exec::kParallel); }, reps);
  std::printf("%-26s %12.6f %12.6f %8.2f  %s\n", name, ts, tp, ts / tp, serial == parallel ? "identical" : "DIFFER");
}

std::vector<CMatrix> random_pd(int count, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<CMatrix> out;
  for (int i = 0; i < count; ++i) {
    CMatrix a(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
    }
    out.push_back(a * a.adjoint() + CMatrix::Identity(d, d));
  }
  return out;
}

}  // namespace

int main() {
  const int threads = apply_thread_cap_from_env();
  std::printf("threads: %d (omp max %d)\n", threads, omp_get_max_threads());
  std::printf("%-26s %12s %12s %8s\n", "kernel", "serial [s]", "openmp [s]", "speedup");

  std::mt19937_64 rng(1);
  const auto slacks = random_pd(256, 8, rng);

  row<std::vector<double>>("invert_positive_definite", 20, [&](Exec e) {
    return invert_positive_definite(slacks, e).logdets;
  });

  const auto inverses = invert_positive_definite(slacks, Exec::kSerial).inverses;
  row<std::vector<double>>("barrier_hessian", 5, [&](Exec e) {
    const Eigen::MatrixXd h = barrier_hessian(inverses, e);
    return std::vector<double>(h.data(), h.data() + h.size());
  });

  std::vector<long double> amps(2001);
  for (size_t i = 0; i < amps.size(); ++i) amps[i] = std::sin(3.14159L * (i + 1) / (amps.size() + 1));
  row<std::vector<long double>>("autocorrelation", 20, [&](Exec e) { return autocorrelation(amps, e); });
  row<long double>("arc_power_integral", 5, [&](Exec e) {
    return arc_power_integral(amps, 0.04L, 3.14159265358979323846L, 256, e);
  });

  const int N = 400;
  row<double>("pair_scan_min", 5, [&](Exec e) {
    return pair_scan_min(
               N, [](int l, int m) { return m - l >= 7; },
               [](int l, int m) { return std::cos(0.01 * l * m) + 1e-3 * (m - l); }, e)
        .value;
  });
  return 0;
}
