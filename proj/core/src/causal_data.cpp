#include "cier/causal.hpp"
#include "cier/error.hpp"

#include <algorithm>
#include <map>

namespace cier::causal {

CausalDataset::CausalDataset(Eigen::MatrixXd treatments, Eigen::VectorXd outcome) {
  if (treatments.rows() != outcome.size()) {
    fail(Errc::DimensionMismatch, "treatment rows and outcome length differ");
  }
  if (outcome.size() < 1) fail(Errc::EmptyEpisode, "causal dataset needs at least one row");
  for (Eigen::Index i = 0; i < treatments.size(); ++i) {
    const double v = treatments.data()[i];
    if (v != 0.0 && v != 1.0) fail(Errc::InvalidParams, "treatment columns must be binary");
  }
  data_.resize(treatments.rows(), treatments.cols() + 1);
  data_.leftCols(treatments.cols()) = treatments;
  data_.col(treatments.cols()) = outcome;
  for (Eigen::Index k = 0; k < treatments.cols(); ++k) names.push_back("F" + std::to_string(k));
  names.emplace_back("Y");
}

CausalDataset CausalDataset::from_encodings(std::span<const tscf::EpisodeEncoding> encodings) {
  if (encodings.empty()) fail(Errc::EmptyEpisode, "no episode encodings");
  const auto K = static_cast<Eigen::Index>(encodings.front().presence.size());
  Eigen::MatrixXd t(static_cast<Eigen::Index>(encodings.size()), K);
  Eigen::VectorXd y(static_cast<Eigen::Index>(encodings.size()));
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    const auto& e = encodings[i];
    if (static_cast<Eigen::Index>(e.presence.size()) != K) fail(Errc::DimensionMismatch, "encodings disagree on K'");
    for (Eigen::Index k = 0; k < K; ++k) t(static_cast<Eigen::Index>(i), k) = e.presence[static_cast<std::size_t>(k)];
    y[static_cast<Eigen::Index>(i)] = e.outcome;
  }
  return CausalDataset(std::move(t), std::move(y));
}

bool CausalDataset::is_constant(int node) const {
  const auto c = data_.col(node);
  return (c.array() == c[0]).all();
}

// ---------------------------------------------------------------------------

std::vector<int> Dag::parents(int node) const {
  std::vector<int> out;
  for (int p = 0; p < n_; ++p) {
    if (has_edge(p, node)) out.push_back(p);
  }
  return out;
}

std::vector<int> Dag::children(int node) const {
  std::vector<int> out;
  for (int c = 0; c < n_; ++c) {
    if (has_edge(node, c)) out.push_back(c);
  }
  return out;
}

std::size_t Dag::edge_count() const { return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), 1)); }

bool Dag::reachable(int from, int to) const {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{from};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = 1;
    for (int c = 0; c < n_; ++c) {
      if (has_edge(v, c) && !seen[static_cast<std::size_t>(c)]) stack.push_back(c);
    }
  }
  return false;
}

bool Dag::is_acyclic() const {
  // Kahn's algorithm.
  std::vector<int> indeg(static_cast<std::size_t>(n_), 0);
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (has_edge(a, b)) ++indeg[static_cast<std::size_t>(b)];
    }
  }
  std::vector<int> ready;
  for (int v = 0; v < n_; ++v) {
    if (indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    ++visited;
    for (int c = 0; c < n_; ++c) {
      if (has_edge(v, c) && --indeg[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
    }
  }
  return visited == n_;
}

// ---------------------------------------------------------------------------

Pag::Pag(int nodes, int outcome)
    : n_(nodes), outcome_(outcome), marks_(static_cast<std::size_t>(nodes * nodes), EndpointMark::None) {}

void Pag::set_mark(int at, int other, EndpointMark m) {
  if (!adjacent(at, other)) fail(Errc::InternalInconsistency, "set_mark on a missing edge");
  marks_[index(other, at)] = m;
}

void Pag::set_edge(int a, EndpointMark mark_at_a, int b, EndpointMark mark_at_b) {
  if (a == b) fail(Errc::InvalidParams, "self-edges are not allowed");
  if (mark_at_a == EndpointMark::None || mark_at_b == EndpointMark::None) {
    fail(Errc::InvalidParams, "edge endpoints need a mark");
  }
  marks_[index(b, a)] = mark_at_a;
  marks_[index(a, b)] = mark_at_b;
}

void Pag::remove_edge(int a, int b) {
  marks_[index(b, a)] = EndpointMark::None;
  marks_[index(a, b)] = EndpointMark::None;
}

std::vector<int> Pag::neighbors(int node) const {
  std::vector<int> out;
  for (int v = 0; v < n_; ++v) {
    if (v != node && adjacent(node, v)) out.push_back(v);
  }
  return out;
}

std::vector<PagEdge> Pag::edges() const {
  std::vector<PagEdge> out;
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      if (adjacent(a, b)) out.push_back({a, mark_at(a, b), b, mark_at(b, a)});
    }
  }
  return out;
}

Dag Pag::to_dag() const {
  Dag dag(n_);
  for (const PagEdge& e : edges()) {
    if (directed(e.a, e.b)) {
      dag.add_edge(e.a, e.b);
    } else if (directed(e.b, e.a)) {
      dag.add_edge(e.b, e.a);
    } else {
      fail(Errc::GraphCycle, "edge " + std::to_string(e.a) + "-" + std::to_string(e.b) + " is not directed");
    }
  }
  if (!dag.is_acyclic()) fail(Errc::GraphCycle, "directed graph contains a cycle");
  return dag;
}

// ---------------------------------------------------------------------------

AteResult ate(const CausalDataset& data, int treatment, int outcome, std::span<const int> z) {
  if (!data.is_binary(treatment)) fail(Errc::InvalidParams, "treatment must be a binary column");
  for (int v : z) {
    if (!data.is_binary(v)) fail(Errc::InvalidParams, "adjustment set must be binary columns");
    if (v == treatment || v == outcome) fail(Errc::InvalidParams, "adjustment set overlaps treatment/outcome");
  }
  const auto t = data.column(treatment);
  const auto y = data.column(outcome);
  const Eigen::Index N = data.rows();

  struct Cell {
    double sum[2] = {0.0, 0.0};
    Eigen::Index count[2] = {0, 0};
  };
  std::map<std::uint64_t, Cell> strata;
  Eigen::Index arm_count[2] = {0, 0};
  for (Eigen::Index i = 0; i < N; ++i) {
    std::uint64_t key = 0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (data.column(z[j])[i] != 0.0) key |= (std::uint64_t{1} << j);
    }
    const int arm = t[i] != 0.0 ? 1 : 0;
    Cell& c = strata[key];
    c.sum[arm] += y[i];
    ++c.count[arm];
    ++arm_count[arm];
  }
  if (arm_count[0] == 0 || arm_count[1] == 0) {
    fail(Errc::NoOverlap, "treatment " + std::to_string(treatment) + " has an empty arm");
  }

  AteResult r;
  double weighted = 0.0;
  double usable_mass = 0.0;
  for (const auto& [key, c] : strata) {
    if (c.count[0] == 0 || c.count[1] == 0) {
      ++r.strata_skipped;
      continue;
    }
    ++r.strata_used;
    const double mass = static_cast<double>(c.count[0] + c.count[1]);
    weighted += mass * (c.sum[1] / static_cast<double>(c.count[1]) - c.sum[0] / static_cast<double>(c.count[0]));
    usable_mass += mass;
  }
  if (r.strata_used == 0) fail(Errc::NoOverlap, "no adjustment stratum contains both treatment arms");
  r.value = weighted / usable_mass;
  return r;
}

}  // namespace cier::causal
