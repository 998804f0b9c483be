#pragma once

#include "cier/series.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cier::ticc {

struct TiccParams {
  int K = 2;
  int w = 3;
  /// Cost charged per label switch between consecutive windows.
  double beta = 50.0;
  /// L1 weight on each cluster's precision matrix: the total objective adds
  /// lambda * |Theta_k|_1 per cluster, so a cluster with n_k members solves a
  /// graphical lasso with penalty 2 lambda / n_k on its covariance.
  double lambda = 0.11;
  int max_em_iters = 100;
  int admm_iters = 1000;
  double tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ClusterModel {
  Eigen::MatrixXd precision;  // (d*w) x (d*w), symmetric block-Toeplitz, PD
  Eigen::VectorXd mean;
  Eigen::Index members = 0;
};

/// A maximal run of identical labels over window indices [start, end].
struct LabelRun {
  int label = 0;
  Eigen::Index start = 0;
  Eigen::Index end = 0;
};

struct Segmentation {
  std::vector<int> labels;  // one per window, n - w + 1 entries
  std::vector<LabelRun> segments;
};

struct TiccFit {
  std::vector<ClusterModel> models;
  Segmentation segmentation;
  /// Objective after the initial M-step and after every EM iteration.
  std::vector<double> objective_trace;
  /// reseeded[i] marks trace entry i as following an empty-cluster repair;
  /// monotonicity holds between entries that are not reseeded.
  std::vector<bool> reseeded;
  int em_iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct AdaptiveKConfig {
  double target_length = 25.0;
  int k_min = 2;
  int k_max = 10;
  int w = 3;
};

/// K = clamp(round(n / target_length), k_min, k_max), capped at max(1, n - w).
int adaptive_k(Eigen::Index n, const AdaptiveKConfig& cfg = {});

/// Gaussian log-density 1/2 logdet(P) - 1/2 (x-m)' P (x-m) - (p/2) log(2 pi).
/// Throws NotPositiveDefinite for a precision that does not factor.
double log_likelihood(const Eigen::VectorXd& window, const ClusterModel& model);

/// Exact minimizer over label sequences of
///   sum_t cost(t, label_t) + beta * #{t : label_t != label_{t+1}}
/// by dynamic programming. Ties prefer keeping the previous label, then the
/// lower label id.
std::vector<int> assign_labels(const Eigen::MatrixXd& cost, double beta);

double labeling_objective(const Eigen::MatrixXd& cost, const std::vector<int>& labels, double beta);

std::vector<LabelRun> label_runs(const std::vector<int>& labels);

/// Toeplitz inverse covariance clustering of one action series by EM.
TiccFit fit_ticc(const series::ActionTimeSeries& series, const TiccParams& params);

/// Per-episode debug dump: labels, row-major precision matrices, objective trace.
std::string to_debug_json(const TiccFit& fit, series::EpisodeId episode_id);

}  // namespace cier::ticc
