#include "cier/causal.hpp"
#include "cier/error.hpp"

#include <algorithm>
#include <random>

namespace cier::causal {

namespace {

using M = EndpointMark;

// Calls fn(subset) for every size-k subset of `pool` in lexicographic order;
// stops early when fn returns true.
template <typename Fn>
bool for_each_subset(const std::vector<int>& pool, std::size_t k, Fn&& fn) {
  if (k > pool.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<int> subset(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (fn(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Dag random_dag(int n, int outcome, const std::vector<bool>& active, std::mt19937_64& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  // The outcome is a sink: move it last.
  std::erase(order, outcome);
  order.push_back(outcome);
  std::bernoulli_distribution coin(0.3);
  Dag dag(n);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const int a = order[i];
      const int b = order[j];
      if (active[static_cast<std::size_t>(a)] && active[static_cast<std::size_t>(b)] && coin(rng)) dag.add_edge(a, b);
    }
  }
  return dag;
}

}  // namespace

void orient_pag(Pag& pag, const std::map<std::pair<int, int>, std::vector<int>>& sepsets, const Dag& phase1) {
  const int n = pag.size();

  // Unshielded colliders.
  for (int c = 0; c < n; ++c) {
    const auto nb = pag.neighbors(c);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const int a = nb[i];
        const int b = nb[j];
        if (pag.adjacent(a, b)) continue;
        bool collider = false;
        auto it = sepsets.find({std::min(a, b), std::max(a, b)});
        if (it != sepsets.end()) {
          collider = std::find(it->second.begin(), it->second.end(), c) == it->second.end();
        } else {
          // Never adjacent after the score phase: defer to its collider structure.
          collider = phase1.has_edge(a, c) && phase1.has_edge(b, c);
        }
        if (collider) {
          pag.set_mark(c, a, M::Arrow);
          pag.set_mark(c, b, M::Arrow);
        }
      }
    }
  }

  auto is_dir = [&](int a, int b) { return pag.directed(a, b); };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 0; b < n; ++b) {
      const auto nb = pag.neighbors(b);
      for (int a : nb) {
        for (int c : nb) {
          if (a == c) continue;
          // R1: a *-> b o-* c, a and c non-adjacent => b -> c.
          if (pag.mark_at(b, a) == M::Arrow && pag.mark_at(b, c) == M::Circle && !pag.adjacent(a, c)) {
            pag.set_mark(b, c, M::Tail);
            pag.set_mark(c, b, M::Arrow);
            changed = true;
          }
        }
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int c : pag.neighbors(a)) {
        if (pag.mark_at(c, a) != M::Circle) continue;
        // R2: a -> b *-> c or a *-> b -> c, with a *-o c => a *-> c.
        for (int b : pag.neighbors(a)) {
          if (b == c || !pag.adjacent(b, c)) continue;
          const bool path1 = is_dir(a, b) && pag.mark_at(c, b) == M::Arrow;
          const bool path2 = pag.mark_at(b, a) == M::Arrow && is_dir(b, c);
          if (path1 || path2) {
            pag.set_mark(c, a, M::Arrow);
            changed = true;
            break;
          }
        }
      }
    }
    for (int b = 0; b < n; ++b) {
      const auto nb = pag.neighbors(b);
      for (int theta : nb) {
        if (pag.mark_at(b, theta) != M::Circle) continue;
        // R3: a *-> b <-* c, a *-o theta o-* c, a and c non-adjacent,
        // theta *-o b => theta *-> b.
        bool fire = false;
        for (std::size_t i = 0; i < nb.size() && !fire; ++i) {
          for (std::size_t j = i + 1; j < nb.size() && !fire; ++j) {
            const int a = nb[i];
            const int c = nb[j];
            if (a == theta || c == theta || pag.adjacent(a, c)) continue;
            if (pag.mark_at(b, a) != M::Arrow || pag.mark_at(b, c) != M::Arrow) continue;
            if (!pag.adjacent(a, theta) || !pag.adjacent(c, theta)) continue;
            if (pag.mark_at(theta, a) == M::Circle && pag.mark_at(theta, c) == M::Circle) fire = true;
          }
        }
        if (fire) {
          pag.set_mark(b, theta, M::Arrow);
          changed = true;
        }
      }
    }
  }
}

GfciResult gfci_lite(const CausalDataset& data, const GfciOptions& options) {
  const int n = data.node_count();
  const int y = data.outcome();
  GfciResult result;

  std::vector<bool> active(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    active[static_cast<std::size_t>(v)] = !data.is_constant(v);
    if (!active[static_cast<std::size_t>(v)]) {
      result.warnings.push_back("column " + data.names[static_cast<std::size_t>(v)] + " is constant; dropped");
    }
  }
  const int active_count = static_cast<int>(std::count(active.begin(), active.end(), true));
  if (data.rows() < 10 * n) {
    result.warnings.push_back("only " + std::to_string(data.rows()) + " rows for " + std::to_string(n) +
                              " variables; discovery is underpowered");
  }

  // Phase 1: hill climbing from the empty graph plus random restarts.
  std::mt19937_64 rng(options.seed);
  result.phase1 = Dag(n);
  result.phase1_score = -std::numeric_limits<double>::infinity();
  for (int run = 0; run <= options.restarts; ++run) {
    Dag start = run == 0 ? Dag(n) : random_dag(n, y, active, rng);
    std::vector<double> trace;
    Dag fitted = hill_climb(data, std::move(start), &trace);
    const double score = trace.back();
    result.phase1_traces.push_back(std::move(trace));
    if (score > result.phase1_score + 1e-9) {
      result.phase1_score = score;
      result.phase1 = std::move(fitted);
    }
  }

  // Phase 2: adjacency pruning from the phase-1 skeleton.
  Pag pag(n, y);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (result.phase1.adjacent(a, b)) pag.set_edge(a, M::Circle, b, M::Circle);
    }
  }
  const int max_depth = std::min(options.max_sepset, std::max(0, active_count - 2));
  for (int depth = 0; depth <= max_depth; ++depth) {
    for (int x = 0; x < n; ++x) {
      for (int z = 0; z < n; ++z) {
        if (x == z || !pag.adjacent(x, z)) continue;
        std::vector<int> pool;
        for (int v : pag.neighbors(x)) {
          if (v != z) pool.push_back(v);
        }
        for_each_subset(pool, static_cast<std::size_t>(depth), [&](const std::vector<int>& s) {
          const CiResult r = ci_test(data, x, z, s);
          if (r.p_value > options.alpha) {
            pag.remove_edge(x, z);
            result.sepsets[{std::min(x, z), std::max(x, z)}] = s;
            return true;
          }
          return false;
        });
      }
    }
  }

  orient_pag(pag, result.sepsets, result.phase1);
  result.pag = std::move(pag);
  return result;
}

}  // namespace cier::causal
