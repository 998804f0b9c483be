#pragma once

#include "cier/tscf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cier::causal {

/// N episodes x (K' binary treatment columns + one continuous outcome).
/// Node ids 0..K'-1 are the treatments, node K' is the outcome.
class CausalDataset {
 public:
  CausalDataset() = default;
  CausalDataset(Eigen::MatrixXd treatments, Eigen::VectorXd outcome);

  static CausalDataset from_encodings(std::span<const tscf::EpisodeEncoding> encodings);

  Eigen::Index rows() const noexcept { return data_.rows(); }
  int treatment_count() const noexcept { return static_cast<int>(data_.cols()) - 1; }
  int node_count() const noexcept { return static_cast<int>(data_.cols()); }
  int outcome() const noexcept { return node_count() - 1; }
  bool is_binary(int node) const noexcept { return node != outcome(); }
  bool is_constant(int node) const;

  auto column(int node) const { return data_.col(node); }
  const Eigen::MatrixXd& matrix() const noexcept { return data_; }

  std::vector<std::string> names;

 private:
  Eigen::MatrixXd data_;
};

// ---------------------------------------------------------------------------
// Conditional independence

struct CiResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  /// Fewer than five rows per contingency cell.
  bool low_power = false;
};

/// G^2 test stratified over Z when X, Y and Z are all binary; otherwise a
/// Fisher-z partial-correlation test after linear residualization on Z.
CiResult ci_test(const CausalDataset& data, int x, int y, std::span<const int> z);

// ---------------------------------------------------------------------------
// DAGs and BIC

class Dag {
 public:
  explicit Dag(int nodes = 0) : n_(nodes), adj_(static_cast<std::size_t>(nodes * nodes), 0) {}

  int size() const noexcept { return n_; }
  bool has_edge(int from, int to) const { return adj_[index(from, to)] != 0; }
  bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }
  void add_edge(int from, int to) { adj_[index(from, to)] = 1; }
  void remove_edge(int from, int to) { adj_[index(from, to)] = 0; }
  std::vector<int> parents(int node) const;
  std::vector<int> children(int node) const;
  std::size_t edge_count() const;
  bool is_acyclic() const;
  /// True when `to` can be reached from `from` along directed edges.
  bool reachable(int from, int to) const;

  friend bool operator==(const Dag&, const Dag&) = default;

 private:
  std::size_t index(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(to);
  }
  int n_;
  std::vector<std::uint8_t> adj_;
};

/// Family log-likelihood minus (params / 2) log N for one node. Binary nodes
/// use a multinomial over binary parent configurations; the outcome is
/// linear-Gaussian in its parents. Binary nodes may not have the outcome as a
/// parent.
double local_bic(const CausalDataset& data, int node, std::span<const int> parents);

/// Sum of local_bic over all nodes. Throws NotADag for cyclic input.
double bic_score(const Dag& dag, const CausalDataset& data);

// ---------------------------------------------------------------------------
// PAGs

enum class EndpointMark : std::uint8_t { None, Tail, Arrow, Circle };

struct PagEdge {
  int a = 0;
  EndpointMark mark_at_a = EndpointMark::Circle;
  int b = 0;
  EndpointMark mark_at_b = EndpointMark::Circle;
};

class Pag {
 public:
  Pag() = default;
  Pag(int nodes, int outcome);

  int size() const noexcept { return n_; }
  int outcome() const noexcept { return outcome_; }
  bool adjacent(int a, int b) const { return mark_at(b, a) != EndpointMark::None; }
  /// Mark at node `at` on the edge between `at` and `other`.
  EndpointMark mark_at(int at, int other) const { return marks_[index(other, at)]; }
  void set_mark(int at, int other, EndpointMark m);
  void set_edge(int a, EndpointMark mark_at_a, int b, EndpointMark mark_at_b);
  void remove_edge(int a, int b);
  std::vector<int> neighbors(int node) const;
  /// Edges with a < b.
  std::vector<PagEdge> edges() const;
  /// a -> b: tail at a, arrow at b.
  bool directed(int a, int b) const {
    return mark_at(a, b) == EndpointMark::Tail && mark_at(b, a) == EndpointMark::Arrow;
  }
  /// The DAG formed by the directed edges; throws GraphCycle if any edge is
  /// not directed.
  Dag to_dag() const;

  friend bool operator==(const Pag&, const Pag&) = default;

 private:
  std::size_t index(int other, int at) const {
    return static_cast<std::size_t>(other) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(at);
  }
  int n_ = 0;
  int outcome_ = -1;
  std::vector<EndpointMark> marks_;
};

// ---------------------------------------------------------------------------
// Discovery

struct GfciOptions {
  double alpha = 0.01;
  std::uint64_t seed = 0;
  /// Random-restart hill climbs after the one started from the empty graph.
  int restarts = 3;
  int max_sepset = 3;
};

struct GfciResult {
  Pag pag;
  Dag phase1;
  double phase1_score = 0.0;
  /// BIC after each accepted move, one trace per hill climb.
  std::vector<std::vector<double>> phase1_traces;
  std::map<std::pair<int, int>, std::vector<int>> sepsets;
  std::vector<std::string> warnings;
};

/// Greedy BIC hill climb over DAGs, then FCI-style adjacency pruning,
/// collider orientation and rules R1-R3.
GfciResult gfci_lite(const CausalDataset& data, const GfciOptions& options = {});

/// Hill climb from `start` accepting only strictly improving single-edge
/// add/delete/reverse moves. Edges out of the outcome are never proposed.
Dag hill_climb(const CausalDataset& data, Dag start, std::vector<double>* trace = nullptr);

/// Applies collider orientation and R1-R3 to a PAG whose adjacencies are fixed.
void orient_pag(Pag& pag, const std::map<std::pair<int, int>, std::vector<int>>& sepsets, const Dag& phase1);

/// Resolves every ambiguous endpoint using temporal precedence from the
/// occurrence map and orients outcome edges into the outcome. The result is
/// fully directed and acyclic.
Pag time_correction(const Pag& pag, const tscf::OccurrenceMap& occurrences,
                    std::vector<std::string>* warnings = nullptr);

/// q = P(first occurrence of a precedes that of b) over episodes holding both;
/// empty when they never co-occur.
std::optional<double> precedence(const tscf::OccurrenceMap& occurrences, int a, int b);

// ---------------------------------------------------------------------------
// Effects

struct AteResult {
  double value = 0.0;
  int strata_used = 0;
  int strata_skipped = 0;
};

/// Backdoor-adjusted difference of means of column `outcome` between
/// treatment arms, stratified over the binary columns in z. Throws NoOverlap.
AteResult ate(const CausalDataset& data, int treatment, int outcome, std::span<const int> z);

enum class PathAggregation { Sum, Product };

struct FactorEffect {
  int factor = 0;
  double strength = 0.0;
  bool relevant = false;
  std::vector<std::vector<int>> paths;
};

struct CausalEffectTable {
  std::vector<FactorEffect> factors;
  /// Signed ATE of each directed edge used, keyed by (from, to).
  std::map<std::pair<int, int>, double> edge_ate;
  std::vector<std::string> warnings;

  double max_strength() const;
};

/// Simple directed paths from `from` to `to`.
std::vector<std::vector<int>> directed_paths(const Dag& dag, int from, int to);

/// Path strengths with an arbitrary edge weight function.
CausalEffectTable path_strengths(const Dag& dag, int outcome,
                                 const std::function<double(int, int)>& edge_strength,
                                 PathAggregation aggregation = PathAggregation::Sum);

/// Edge strength |ate(a, b, other parents of b)|, aggregated along every
/// directed path from each factor to the outcome.
CausalEffectTable path_strengths(const Pag& corrected, const CausalDataset& data,
                                 PathAggregation aggregation = PathAggregation::Sum);

// ---------------------------------------------------------------------------
// Export

/// Graphviz text. Each edge carries `mark="xy"` with x the mark at the tail
/// node of the dot edge and y the mark at its head ('o' circle, '>' arrow,
/// '-' tail).
std::string to_dot(const Pag& pag, std::span<const std::string> names = {});
std::string effects_to_json(const CausalEffectTable& table, std::span<const std::string> names = {});

}  // namespace cier::causal
