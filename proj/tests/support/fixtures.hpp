#pragma once

#include "cier/causal.hpp"
#include "cier/series.hpp"
#include "cier/tscf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace cier::testing {

// Regime-switching Gaussian series: each block draws i.i.d. 2-d frames from
// N(0, C) where C is the identity (regime 0) or has off-diagonal 0.9 (regime 1).
struct RegimeSeries {
  series::ActionTimeSeries series;
  std::vector<int> frame_labels;
};

RegimeSeries regime_series(std::uint64_t seed, const std::vector<std::pair<int, int>>& blocks);

/// 300 steps: regime 0 then regime 1, switching at a seed-dependent step in
/// [100, 200].
RegimeSeries two_regime_series(std::uint64_t seed);

/// Macro-F1 of window labels against frame labels (window t takes the label of
/// its first frame), maximized over relabelings of the predicted clusters.
double macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth_frames, int k);

/// Exhaustive minimizer of the labeling objective; ties broken by the
/// lexicographically smallest sequence.
std::vector<int> brute_force_labels(const Eigen::MatrixXd& cost, double beta);

// Binary-treatment SCM fixtures. Columns are treatments followed by the
// continuous outcome (last column).
struct ScmFixture {
  causal::CausalDataset data;
  /// Undirected true skeleton as (a, b) with a < b.
  std::vector<std::pair<int, int>> skeleton;
  std::vector<std::string> names;
};

/// U -> A, U -> B; the outcome is pure noise.
ScmFixture fork_fixture(std::uint64_t seed, int n = 2000);
/// A -> B -> Y.
ScmFixture chain_fixture(std::uint64_t seed, int n = 2000);
/// A -> B -> Y, A -> C -> Y.
ScmFixture diamond_fixture(std::uint64_t seed, int n = 2000);

/// Z -> X, Z -> Y, X -> Y with X = Bern(0.2 + 0.6 Z) and
/// Y = direct X + confounding Z + N(0, 0.1^2). Column order Z, X, Y.
struct ConfoundedFixture {
  causal::CausalDataset data;
  double direct = 1.0;
  double confounding = 2.0;
  /// E[Y|X=1] - E[Y|X=0] minus the direct effect: confounding * 0.6.
  double bias() const { return confounding * 0.6; }
};
ConfoundedFixture confounded_fixture(std::uint64_t seed, int n = 2000);

double skeleton_f1(const causal::Pag& pag, const std::vector<std::pair<int, int>>& truth);

/// Random DAG over n nodes following a random topological order, with the
/// last node forced to be a sink.
causal::Dag random_dag(int n, double edge_probability, std::mt19937_64& rng);

/// Sum-aggregated path strength of every factor computed by enumerating every
/// sequence of distinct intermediate nodes.
std::vector<double> brute_force_path_strengths(const causal::Dag& dag, int outcome,
                                               const std::function<double(int, int)>& weight);

/// Occurrence map from (episode, factor, start, end) rows.
tscf::OccurrenceMap make_occurrences(
    const std::vector<std::tuple<series::EpisodeId, int, Eigen::Index, Eigen::Index>>& rows);

series::ActionTimeSeries make_series(const std::vector<std::vector<double>>& frames, series::EpisodeId id = 0,
                                     double episode_return = 0.0);

/// A fresh empty directory under the system temp path.
std::string temp_dir(const std::string& tag);

}  // namespace cier::testing
