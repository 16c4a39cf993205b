#include <algorithm>

#include "pacmet/optimize.hpp"

namespace pacmet {

namespace {

int stencil_k(const LikelihoodTable& table, const StateFamily& fam, const Window& w) {
  if (table.grid_size() != fam.size()) throw GridMismatch("likelihood table and family grids differ");
  return snap_window(w, fam.step()).k;
}

}  // namespace

PostprocessResult smap_postprocess(const LikelihoodTable& table, const StateFamily& fam, const Window& w) {
  const int k = stencil_k(table, fam, w);
  const int N = fam.size();
  PostprocessResult out;
  out.strategy.assign(table.outcomes(), 0);
  for (int o = 0; o < table.outcomes(); ++o) {
    if (table.posterior[o].empty()) continue;
    double best = -1.0;
    for (int l = 0; l < N; ++l) {
      double smoothed = 0.0;
      for (int m = 0; m < N; ++m) smoothed += fam.window_weight(k, l, m) * table.posterior[o][m];
      if (smoothed > best) {
        best = smoothed;
        out.strategy[o] = l;
      }
    }
    out.eta += table.marginal[o] * best;
  }
  return out;
}

PostprocessResult smcl_postprocess(const LikelihoodTable& table, const StateFamily& fam, const Window& w) {
  const int k = stencil_k(table, fam, w);
  const int N = fam.size();
  PostprocessResult out;
  out.strategy.assign(table.outcomes(), 0);
  double error = 0.0;
  for (int o = 0; o < table.outcomes(); ++o) {
    double best = 0.0;
    for (int tau = 0; tau < N; ++tau) {
      double worst = 0.0;
      for (int l = 0; l < N; ++l) {
        worst = std::max(worst, (1.0 - fam.window_weight(k, l, tau)) * table.likelihood[o][l]);
      }
      if (tau == 0 || worst < best) {
        best = worst;
        out.strategy[o] = tau;
      }
    }
    error += best;
  }
  out.eta = 1.0 - error;
  return out;
}

double strategy_success_probability(const LikelihoodTable& table, const StateFamily& fam, const Window& w,
                                    const std::vector<int>& strategy) {
  const int k = stencil_k(table, fam, w);
  double eta = 0.0;
  for (int o = 0; o < table.outcomes(); ++o) {
    for (int l = 0; l < fam.size(); ++l) {
      eta += table.prior[l] * table.likelihood[o][l] * fam.window_weight(k, l, strategy[o]);
    }
  }
  return eta;
}

double strategy_minimax_success_probability(const LikelihoodTable& table, const StateFamily& fam, const Window& w,
                                            const std::vector<int>& strategy) {
  const int k = stencil_k(table, fam, w);
  double worst = 1.0;
  for (int l = 0; l < fam.size(); ++l) {
    double p = 0.0;
    for (int o = 0; o < table.outcomes(); ++o) p += table.likelihood[o][l] * fam.window_weight(k, l, strategy[o]);
    worst = std::min(worst, p);
  }
  return worst;
}

}  // namespace pacmet
