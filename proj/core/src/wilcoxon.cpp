#include "cier/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cier::metrics {

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
  std::vector<double> d;
  for (double x : differences) {
    if (x != 0.0) d.push_back(x);
  }
  WilcoxonResult r;
  r.n = static_cast<int>(d.size());
  if (d.empty()) return r;

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });

  // Doubled ranks stay integral under tie averaging: a tie group covering
  // ranks i+1..j gets (i+1+j) each.
  std::vector<long> rank2(d.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    for (std::size_t k = i; k < j; ++k) rank2[order[k]] = static_cast<long>(i + 1 + j);
    i = j;
  }

  long observed2 = 0;
  long total2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total2 += rank2[i];
    if (d[i] > 0.0) observed2 += rank2[i];
  }
  r.w_plus = observed2 / 2.0;
  r.w_minus = (total2 - observed2) / 2.0;

  // Null distribution of doubled W+: each rank enters with probability 1/2.
  std::vector<double> prob(static_cast<std::size_t>(total2) + 1, 0.0);
  prob[0] = 1.0;
  long reach = 0;
  for (long rk : rank2) {
    for (long s = reach; s >= 0; --s) {
      const double p = prob[static_cast<std::size_t>(s)];
      if (p == 0.0) continue;
      prob[static_cast<std::size_t>(s + rk)] += 0.5 * p;
      prob[static_cast<std::size_t>(s)] = 0.5 * p;
    }
    reach += rk;
  }
  double tail = 0.0;
  for (long s = observed2; s <= total2; ++s) tail += prob[static_cast<std::size_t>(s)];
  r.p_value = std::min(1.0, tail);
  return r;
}

}  // namespace cier::metrics
