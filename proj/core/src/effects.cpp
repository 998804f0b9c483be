#include "cier/causal.hpp"
#include "cier/error.hpp"

#include <algorithm>
#include <cmath>

namespace cier::causal {

double CausalEffectTable::max_strength() const {
  double m = 0.0;
  for (const FactorEffect& f : factors) {
    if (f.relevant) m = std::max(m, f.strength);
  }
  return m;
}

std::vector<std::vector<int>> directed_paths(const Dag& dag, int from, int to) {
  std::vector<std::vector<int>> out;
  std::vector<int> path{from};
  std::vector<std::uint8_t> on_path(static_cast<std::size_t>(dag.size()), 0);
  on_path[static_cast<std::size_t>(from)] = 1;

  // Iterative DFS; next[i] is the next child to try from path[i].
  std::vector<int> next{0};
  while (!path.empty()) {
    const int v = path.back();
    if (v == to) {
      out.push_back(path);
      on_path[static_cast<std::size_t>(v)] = 0;
      path.pop_back();
      next.pop_back();
      continue;
    }
    int& c = next.back();
    while (c < dag.size() && (!dag.has_edge(v, c) || on_path[static_cast<std::size_t>(c)])) ++c;
    if (c == dag.size()) {
      on_path[static_cast<std::size_t>(v)] = 0;
      path.pop_back();
      next.pop_back();
      continue;
    }
    const int child = c++;
    path.push_back(child);
    next.push_back(0);
    on_path[static_cast<std::size_t>(child)] = 1;
  }
  return out;
}

CausalEffectTable path_strengths(const Dag& dag, int outcome, const std::function<double(int, int)>& edge_strength,
                                 PathAggregation aggregation) {
  if (!dag.is_acyclic()) fail(Errc::GraphCycle, "path strengths need an acyclic graph");
  CausalEffectTable table;
  std::map<std::pair<int, int>, double> memo;
  auto strength_of = [&](int a, int b) {
    auto [it, inserted] = memo.try_emplace({a, b}, 0.0);
    if (inserted) it->second = edge_strength(a, b);
    return it->second;
  };

  for (int k = 0; k < dag.size(); ++k) {
    if (k == outcome) continue;
    FactorEffect fe;
    fe.factor = k;
    fe.paths = directed_paths(dag, k, outcome);
    for (const auto& path : fe.paths) {
      double agg = aggregation == PathAggregation::Sum ? 0.0 : 1.0;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double s = strength_of(path[i], path[i + 1]);
        agg = aggregation == PathAggregation::Sum ? agg + s : agg * s;
      }
      fe.strength += agg;
    }
    if (!std::isfinite(fe.strength)) fe.strength = 0.0;
    fe.relevant = !fe.paths.empty() && fe.strength > 0.0;
    if (!fe.relevant) fe.strength = 0.0;
    table.factors.push_back(std::move(fe));
  }
  return table;
}

CausalEffectTable path_strengths(const Pag& corrected, const CausalDataset& data, PathAggregation aggregation) {
  if (corrected.size() != data.node_count()) fail(Errc::DimensionMismatch, "graph and dataset node counts differ");
  const Dag dag = corrected.to_dag();
  std::map<std::pair<int, int>, double> signed_ate;
  std::vector<std::string> warnings;
  auto edge = [&](int a, int b) {
    std::vector<int> z;
    for (int p : dag.parents(b)) {
      if (p != a) z.push_back(p);
    }
    double v = 0.0;
    try {
      v = ate(data, a, b, z).value;
    } catch (const Error& e) {
      if (e.code() != Errc::NoOverlap) throw;
      warnings.push_back(e.what());
    }
    signed_ate[{a, b}] = v;
    return std::abs(v);
  };
  CausalEffectTable table = path_strengths(dag, data.outcome(), edge, aggregation);
  table.edge_ate = std::move(signed_ate);
  table.warnings = std::move(warnings);
  return table;
}

}  // namespace cier::causal
