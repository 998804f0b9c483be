#include "cier/ticc.hpp"

#include "cier/error.hpp"
#include "cier/toeplitz_glasso.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace cier::ticc {

void TiccParams::validate() const {
  if (K < 1) fail(Errc::InvalidParams, "K must be >= 1");
  if (w < 1) fail(Errc::InvalidParams, "w must be >= 1");
  if (!(beta >= 0.0)) fail(Errc::InvalidParams, "beta must be >= 0");
  if (!(lambda >= 0.0)) fail(Errc::InvalidParams, "lambda must be >= 0");
  if (max_em_iters < 1) fail(Errc::InvalidParams, "max_em_iters must be >= 1");
  if (admm_iters < 1) fail(Errc::InvalidParams, "admm_iters must be >= 1");
  if (!(tol > 0.0)) fail(Errc::InvalidParams, "tol must be > 0");
}

int adaptive_k(Eigen::Index n, const AdaptiveKConfig& cfg) {
  if (n < 1) fail(Errc::InvalidParams, "series length must be >= 1");
  const double raw = std::round(static_cast<double>(n) / cfg.target_length);
  int k = static_cast<int>(std::clamp(raw, static_cast<double>(cfg.k_min), static_cast<double>(cfg.k_max)));
  const auto cap = std::max<Eigen::Index>(1, n - cfg.w);
  return static_cast<int>(std::min<Eigen::Index>(k, cap));
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

struct Factored {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet = 0.0;
  double l1 = 0.0;
};

Factored factor(const ClusterModel& model) {
  Factored f;
  f.llt.compute(model.precision);
  if (f.llt.info() != Eigen::Success) fail(Errc::NotPositiveDefinite, "cluster precision does not factor");
  f.logdet = 2.0 * f.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  f.l1 = model.precision.cwiseAbs().sum();
  return f;
}

// Negative log-likelihood of every row of `windows` under one model.
Eigen::VectorXd window_nll(const Eigen::MatrixXd& windows, const ClusterModel& model, const Factored& f) {
  const Eigen::Index p = windows.cols();
  Eigen::MatrixXd centered = windows.rowwise() - model.mean.transpose();
  // (x-m)' P (x-m) = |L' (x-m)|^2 with P = L L'.
  Eigen::MatrixXd proj = centered * f.llt.matrixL().toDenseMatrix();
  Eigen::VectorXd quad = proj.rowwise().squaredNorm();
  return (0.5 * quad.array() - 0.5 * f.logdet + 0.5 * static_cast<double>(p) * kLog2Pi).matrix();
}

// T x K matrix of per-window NLL.
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& windows, const std::vector<ClusterModel>& models) {
  Eigen::MatrixXd cost(windows.rows(), static_cast<Eigen::Index>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    const Factored f = factor(models[k]);
    cost.col(static_cast<Eigen::Index>(k)) = window_nll(windows, models[k], f);
  }
  return cost;
}

double sparsity_penalty(const std::vector<ClusterModel>& models, double lambda) {
  double total = 0.0;
  for (const ClusterModel& m : models) total += lambda * m.precision.cwiseAbs().sum();
  return total;
}

double cluster_objective(const Eigen::MatrixXd& members, const ClusterModel& model, double lambda) {
  const Factored f = factor(model);
  return window_nll(members, model, f).sum() + lambda * f.l1;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& windows, const std::vector<int>& labels, int k) {
  std::vector<Eigen::Index> idx;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] == k) idx.push_back(static_cast<Eigen::Index>(t));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), windows.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = windows.row(idx[i]);
  return out;
}

ClusterModel fit_cluster(const Eigen::MatrixXd& members, Eigen::Index block, const TiccParams& params,
                         std::vector<std::string>& warnings, int cluster) {
  const Eigen::Index p = members.cols();
  ClusterModel model;
  model.members = members.rows();
  model.mean = members.colwise().mean().transpose();
  const Eigen::MatrixXd centered = members.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(members.rows());
  if (params.lambda == 0.0) cov += 1e-6 * Eigen::MatrixXd::Identity(p, p);

  AdmmOptions opts;
  opts.max_iters = params.admm_iters;
  opts.tol = params.tol;
  const double penalty = 2.0 * params.lambda / static_cast<double>(std::max<Eigen::Index>(members.rows(), 1));
  GlassoResult solved = solve_toeplitz_glasso(cov, block, penalty, opts);
  if (!solved.converged) {
    warnings.push_back("cluster " + std::to_string(cluster) + ": ADMM stopped after " +
                       std::to_string(solved.iterations) + " iterations without converging");
  }
  model.precision = std::move(solved.precision);
  return model;
}

// Moves the worst-fitting windows into each empty cluster. Never empties a
// donor cluster.
bool repair_empty(std::vector<int>& labels, const Eigen::MatrixXd& cost, int K) {
  const auto T = static_cast<Eigen::Index>(labels.size());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  bool repaired = false;
  const Eigen::Index quota = (T + K - 1) / K;
  for (int k = 0; k < K; ++k) {
    if (counts[static_cast<std::size_t>(k)] != 0) continue;
    repaired = true;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return cost(a, labels[static_cast<std::size_t>(a)]) > cost(b, labels[static_cast<std::size_t>(b)]);
    });
    Eigen::Index moved = 0;
    for (Eigen::Index t : order) {
      if (moved == quota) break;
      int& l = labels[static_cast<std::size_t>(t)];
      if (counts[static_cast<std::size_t>(l)] <= 1) continue;
      --counts[static_cast<std::size_t>(l)];
      l = k;
      ++counts[static_cast<std::size_t>(k)];
      ++moved;
    }
  }
  return repaired;
}

}  // namespace

double log_likelihood(const Eigen::VectorXd& window, const ClusterModel& model) {
  if (window.size() != model.precision.rows() || window.size() != model.mean.size()) {
    fail(Errc::DimensionMismatch, "window dimension does not match the cluster model");
  }
  const Factored f = factor(model);
  Eigen::MatrixXd row = window.transpose();
  return -window_nll(row, model, f)[0];
}

std::vector<int> assign_labels(const Eigen::MatrixXd& cost, double beta) {
  const Eigen::Index T = cost.rows();
  const Eigen::Index K = cost.cols();
  std::vector<int> labels(static_cast<std::size_t>(T), 0);
  if (T == 0 || K == 0) return labels;

  Eigen::MatrixXd best(T, K);
  Eigen::MatrixXi from(T, K);
  best.row(0) = cost.row(0);
  from.row(0).setConstant(-1);
  for (Eigen::Index t = 1; t < T; ++t) {
    Eigen::Index arg = 0;
    const double prev_min = best.row(t - 1).minCoeff(&arg);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double stay = best(t - 1, k);
      const double switch_cost = prev_min + beta;
      if (stay <= switch_cost) {
        best(t, k) = stay + cost(t, k);
        from(t, k) = static_cast<int>(k);
      } else {
        best(t, k) = switch_cost + cost(t, k);
        from(t, k) = static_cast<int>(arg);
      }
    }
  }
  Eigen::Index last = 0;
  best.row(T - 1).minCoeff(&last);
  labels[static_cast<std::size_t>(T - 1)] = static_cast<int>(last);
  for (Eigen::Index t = T - 1; t > 0; --t) {
    labels[static_cast<std::size_t>(t - 1)] = from(t, labels[static_cast<std::size_t>(t)]);
  }
  return labels;
}

double labeling_objective(const Eigen::MatrixXd& cost, const std::vector<int>& labels, double beta) {
  double total = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    total += cost(static_cast<Eigen::Index>(t), labels[t]);
    if (t > 0 && labels[t] != labels[t - 1]) total += beta;
  }
  return total;
}

std::vector<LabelRun> label_runs(const std::vector<int>& labels) {
  std::vector<LabelRun> runs;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (runs.empty() || runs.back().label != labels[t]) {
      runs.push_back({labels[t], static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t)});
    } else {
      runs.back().end = static_cast<Eigen::Index>(t);
    }
  }
  return runs;
}

TiccFit fit_ticc(const series::ActionTimeSeries& series, const TiccParams& params) {
  params.validate();
  if (series.length() < params.w) {
    fail(Errc::NotEnoughData, "series of length " + std::to_string(series.length()) + " is shorter than w");
  }
  const Eigen::MatrixXd windows = series::window_stack(series, params.w);
  const Eigen::Index T = windows.rows();
  const int K = params.K;
  if (T < 2 * static_cast<Eigen::Index>(K)) {
    fail(Errc::NotEnoughData, std::to_string(T) + " windows cannot support " + std::to_string(K) + " clusters");
  }
  const Eigen::Index block = series.dim();

  TiccFit fit;
  std::vector<int> labels(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    labels[static_cast<std::size_t>(t)] = static_cast<int>((t * K) / T);
  }

  auto m_step = [&](const std::vector<int>& lab, const std::vector<ClusterModel>* previous) {
    std::vector<ClusterModel> models(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const Eigen::MatrixXd members = gather(windows, lab, k);
      ClusterModel candidate = fit_cluster(members, block, params, fit.warnings, k);
      if (previous != nullptr) {
        // Keep the previous model if the approximate solve did not improve
        // on it for the new membership.
        const ClusterModel& old = (*previous)[static_cast<std::size_t>(k)];
        if (cluster_objective(members, old, params.lambda) < cluster_objective(members, candidate, params.lambda)) {
          candidate.precision = old.precision;
          candidate.mean = old.mean;
        }
      }
      candidate.members = members.rows();
      models[static_cast<std::size_t>(k)] = std::move(candidate);
    }
    return models;
  };

  std::vector<ClusterModel> models = m_step(labels, nullptr);
  auto objective = [&] {
    return labeling_objective(cost_matrix(windows, models), labels, params.beta) +
           sparsity_penalty(models, params.lambda);
  };
  fit.objective_trace.push_back(objective());
  fit.reseeded.push_back(false);

  // The reported segmentation is always a DP optimum; repaired labels only
  // feed the next M-step.
  std::vector<int> previous_dp;
  for (int iter = 0; iter < params.max_em_iters; ++iter) {
    const Eigen::MatrixXd cost = cost_matrix(windows, models);
    std::vector<int> next = assign_labels(cost, params.beta);
    fit.em_iterations = iter + 1;
    if (next == labels || next == previous_dp) {
      labels = std::move(next);
      fit.converged = true;
      break;
    }
    previous_dp = next;
    const bool repaired = repair_empty(next, cost, K);
    labels = std::move(next);
    models = m_step(labels, &models);
    fit.objective_trace.push_back(objective());
    fit.reseeded.push_back(repaired);
  }
  if (!fit.converged) {
    fit.warnings.push_back("EM reached max_em_iters=" + std::to_string(params.max_em_iters) +
                           " before labels stabilized");
    labels = assign_labels(cost_matrix(windows, models), params.beta);
  }

  fit.models = std::move(models);
  fit.segmentation.labels = std::move(labels);
  fit.segmentation.segments = label_runs(fit.segmentation.labels);
  return fit;
}

std::string to_debug_json(const TiccFit& fit, series::EpisodeId episode_id) {
  nlohmann::json j;
  j["episode"] = episode_id;
  j["labels"] = fit.segmentation.labels;
  j["objective_trace"] = fit.objective_trace;
  j["converged"] = fit.converged;
  j["em_iterations"] = fit.em_iterations;
  auto& clusters = j["clusters"] = nlohmann::json::array();
  for (const ClusterModel& m : fit.models) {
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(m.precision.size()));
    for (Eigen::Index r = 0; r < m.precision.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.precision.cols(); ++c) row_major.push_back(m.precision(r, c));
    }
    clusters.push_back({{"dim", m.precision.rows()},
                        {"members", m.members},
                        {"mean", std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size())},
                        {"precision", std::move(row_major)}});
  }
  j["warnings"] = fit.warnings;
  return j.dump(2);
}

}  // namespace cier::ticc
