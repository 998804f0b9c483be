#include "cier/causal.hpp"
#include "cier/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace cier::causal {

namespace {

using M = EndpointMark;

std::optional<double> median_first_occurrence(const tscf::OccurrenceMap& occ, int factor) {
  std::vector<double> firsts;
  for (tscf::EpisodeId ep : occ.episodes()) {
    if (auto f = occ.first_occurrence(ep, factor)) firsts.push_back(static_cast<double>(*f));
  }
  if (firsts.empty()) return std::nullopt;
  std::sort(firsts.begin(), firsts.end());
  const std::size_t m = firsts.size();
  return m % 2 == 1 ? firsts[m / 2] : 0.5 * (firsts[m / 2 - 1] + firsts[m / 2]);
}

struct Proposal {
  int tier = 0;             // 0 definite, 1 one circle, 2 precedence
  double confidence = 0.0;  // |q - 1/2| for precedence proposals
  int from = 0;
  int to = 0;
};

}  // namespace

std::optional<double> precedence(const tscf::OccurrenceMap& occurrences, int a, int b) {
  int both = 0;
  int a_first = 0;
  for (tscf::EpisodeId ep : occurrences.episodes()) {
    const auto fa = occurrences.first_occurrence(ep, a);
    const auto fb = occurrences.first_occurrence(ep, b);
    if (!fa || !fb) continue;
    ++both;
    if (*fa < *fb) ++a_first;
  }
  if (both == 0) return std::nullopt;
  return static_cast<double>(a_first) / static_cast<double>(both);
}

Pag time_correction(const Pag& pag, const tscf::OccurrenceMap& occurrences, std::vector<std::string>* warnings) {
  const int y = pag.outcome();
  const int n = pag.size();

  // Direction implied by temporal precedence; ties resolve to the lower id.
  auto by_precedence = [&](int a, int b) -> std::pair<int, double> {
    const int lo = std::min(a, b);
    const int hi = std::max(a, b);
    if (auto q = precedence(occurrences, lo, hi)) {
      if (*q > 0.5) return {lo, *q - 0.5};
      if (*q < 0.5) return {hi, 0.5 - *q};
      return {lo, 0.0};
    }
    const auto ma = median_first_occurrence(occurrences, lo);
    const auto mb = median_first_occurrence(occurrences, hi);
    if (ma && mb && *ma != *mb) return {*ma < *mb ? lo : hi, 0.0};
    return {lo, 0.0};
  };

  std::vector<Proposal> proposals;
  Dag dag(n);
  for (const PagEdge& e : pag.edges()) {
    const int a = e.a;
    const int b = e.b;
    if (a == y || b == y) {
      // Outcome edges always point into the outcome.
      dag.add_edge(a == y ? b : a, y);
      continue;
    }
    const M at_a = e.mark_at_a;
    const M at_b = e.mark_at_b;
    if (at_a == M::Tail && at_b == M::Arrow) {
      proposals.push_back({0, 0.0, a, b});
    } else if (at_b == M::Tail && at_a == M::Arrow) {
      proposals.push_back({0, 0.0, b, a});
    } else if (at_a == M::Circle && at_b == M::Arrow) {
      proposals.push_back({1, 0.0, a, b});  // a o-> b asserted as a -> b
    } else if (at_b == M::Circle && at_a == M::Arrow) {
      proposals.push_back({1, 0.0, b, a});
    } else {
      // a <-> b, a o-o b and anything else left ambiguous.
      auto [cause, conf] = by_precedence(a, b);
      proposals.push_back({2, conf, cause, cause == a ? b : a});
    }
  }
  std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& l, const Proposal& r) {
    return std::tie(l.tier, r.confidence, l.from, l.to) < std::tie(r.tier, l.confidence, r.from, r.to);
  });

  for (const Proposal& p : proposals) {
    if (dag.reachable(p.to, p.from)) {
      // Keeping p would close a cycle through already-placed edges.
      dag.add_edge(p.to, p.from);
      if (warnings) {
        warnings->push_back("reversed " + std::to_string(p.from) + "->" + std::to_string(p.to) +
                            " to keep the corrected graph acyclic");
      }
    } else {
      dag.add_edge(p.from, p.to);
    }
  }

  Pag out(n, y);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (dag.has_edge(a, b)) out.set_edge(a, M::Tail, b, M::Arrow);
    }
  }
  if (!dag.is_acyclic()) fail(Errc::GraphCycle, "time correction produced a cycle");
  return out;
}

}  // namespace cier::causal
