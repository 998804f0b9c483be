#include "cier/causal.hpp"
#include "cier/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace cier::causal {

double local_bic(const CausalDataset& data, int node, std::span<const int> parents) {
  const Eigen::Index N = data.rows();
  const double logn = std::log(static_cast<double>(N));

  if (data.is_binary(node)) {
    for (int p : parents) {
      if (!data.is_binary(p)) fail(Errc::InvalidParams, "binary node cannot have the outcome as a parent");
    }
    std::unordered_map<std::uint64_t, std::array<double, 2>> counts;
    for (Eigen::Index i = 0; i < N; ++i) {
      std::uint64_t key = 0;
      for (std::size_t j = 0; j < parents.size(); ++j) {
        if (data.column(parents[j])[i] != 0.0) key |= (std::uint64_t{1} << j);
      }
      counts[key][data.column(node)[i] != 0.0 ? 1 : 0] += 1.0;
    }
    double ll = 0.0;
    for (const auto& [key, c] : counts) {
      const double nj = c[0] + c[1];
      for (double v : c) {
        if (v > 0.0) ll += v * std::log(v / nj);
      }
    }
    const double params = std::pow(2.0, static_cast<double>(parents.size()));
    return ll - 0.5 * params * logn;
  }

  // Linear-Gaussian outcome.
  const auto p = static_cast<Eigen::Index>(parents.size());
  Eigen::MatrixXd design(N, p + 1);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) design.col(j + 1) = data.column(parents[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd y = data.column(node);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const double rss = (y - design * qr.solve(y)).squaredNorm();
  const double sigma2 = std::max(rss / static_cast<double>(N), 1e-12);
  const double ll = -0.5 * static_cast<double>(N) * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
  const double params = static_cast<double>(p) + 2.0;  // coefficients, intercept, variance
  return ll - 0.5 * params * logn;
}

double bic_score(const Dag& dag, const CausalDataset& data) {
  if (dag.size() != data.node_count()) fail(Errc::DimensionMismatch, "graph and dataset node counts differ");
  if (!dag.is_acyclic()) fail(Errc::NotADag, "bic_score requires an acyclic graph");
  double total = 0.0;
  for (int v = 0; v < dag.size(); ++v) {
    const auto pa = dag.parents(v);
    total += local_bic(data, v, pa);
  }
  return total;
}

namespace {

class ScoreCache {
 public:
  explicit ScoreCache(const CausalDataset& data) : data_(data) {}

  double family(int node, const std::vector<int>& parents) {
    std::uint64_t mask = 0;
    for (int p : parents) mask |= (std::uint64_t{1} << p);
    const auto key = (static_cast<std::uint64_t>(node) << 58) ^ mask;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double s = local_bic(data_, node, parents);
    cache_.emplace(key, s);
    return s;
  }

 private:
  const CausalDataset& data_;
  std::unordered_map<std::uint64_t, double> cache_;
};

std::vector<int> with(std::vector<int> v, int x) {
  v.push_back(x);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> without(std::vector<int> v, int x) {
  std::erase(v, x);
  return v;
}

}  // namespace

Dag hill_climb(const CausalDataset& data, Dag dag, std::vector<double>* trace) {
  const int n = data.node_count();
  const int y = data.outcome();
  if (n > 58) fail(Errc::InvalidParams, "hill climb supports at most 58 nodes");
  if (dag.size() != n) fail(Errc::DimensionMismatch, "start graph and dataset node counts differ");
  ScoreCache cache(data);

  std::vector<bool> active(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) active[static_cast<std::size_t>(v)] = !data.is_constant(v);

  std::vector<double> local(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) local[static_cast<std::size_t>(v)] = cache.family(v, dag.parents(v));
  auto total = [&] {
    double s = 0.0;
    for (double l : local) s += l;
    return s;
  };
  if (trace) trace->push_back(total());

  constexpr double kMinGain = 1e-9;
  for (;;) {
    double best_gain = kMinGain;
    int best_kind = -1;  // 0 add, 1 delete, 2 reverse
    int best_a = -1;
    int best_b = -1;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || !active[static_cast<std::size_t>(a)] || !active[static_cast<std::size_t>(b)]) continue;
        if (dag.has_edge(a, b)) {
          const auto pa_b = dag.parents(b);
          const double del = cache.family(b, without(pa_b, a)) - local[static_cast<std::size_t>(b)];
          if (del > best_gain) {
            best_gain = del;
            best_kind = 1;
            best_a = a;
            best_b = b;
          }
          if (b != y) {
            // Reverse a->b into b->a: legal unless another path a ~> b remains.
            dag.remove_edge(a, b);
            const bool creates_cycle = dag.reachable(a, b);
            dag.add_edge(a, b);
            if (!creates_cycle) {
              const auto pa_a = dag.parents(a);
              const double rev = del + cache.family(a, with(pa_a, b)) - local[static_cast<std::size_t>(a)];
              if (rev > best_gain) {
                best_gain = rev;
                best_kind = 2;
                best_a = a;
                best_b = b;
              }
            }
          }
        } else if (!dag.has_edge(b, a) && a != y) {
          if (dag.reachable(b, a)) continue;
          const auto pa_b = dag.parents(b);
          const double add = cache.family(b, with(pa_b, a)) - local[static_cast<std::size_t>(b)];
          if (add > best_gain) {
            best_gain = add;
            best_kind = 0;
            best_a = a;
            best_b = b;
          }
        }
      }
    }
    if (best_kind < 0) break;
    if (best_kind == 0) {
      dag.add_edge(best_a, best_b);
    } else if (best_kind == 1) {
      dag.remove_edge(best_a, best_b);
    } else {
      dag.remove_edge(best_a, best_b);
      dag.add_edge(best_b, best_a);
      local[static_cast<std::size_t>(best_a)] = cache.family(best_a, dag.parents(best_a));
    }
    local[static_cast<std::size_t>(best_b)] = cache.family(best_b, dag.parents(best_b));
    if (trace) trace->push_back(total());
  }
  return dag;
}

}  // namespace cier::causal
