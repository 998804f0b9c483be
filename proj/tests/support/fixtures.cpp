#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <set>

#include <unistd.h>

namespace cier::testing {

RegimeSeries regime_series(std::uint64_t seed, const std::vector<std::pair<int, int>>& blocks) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const double rho = 0.9;
  const double off = std::sqrt(1.0 - rho * rho);
  int n = 0;
  for (auto [regime, len] : blocks) n += len;
  RegimeSeries out;
  out.series.episode_id = 0;
  out.series.frames.resize(n, 2);
  int t = 0;
  for (auto [regime, len] : blocks) {
    for (int i = 0; i < len; ++i, ++t) {
      const double z1 = g(rng);
      const double z2 = g(rng);
      out.series.frames(t, 0) = z1;
      out.series.frames(t, 1) = regime == 0 ? z2 : rho * z1 + off * z2;
      out.frame_labels.push_back(regime);
    }
  }
  return out;
}

RegimeSeries two_regime_series(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int change = std::uniform_int_distribution<int>(100, 200)(rng);
  return regime_series(seed, {{0, change}, {1, 300 - change}});
}

double macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth_frames, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t t = 0; t < predicted.size(); ++t) {
        const bool p = perm[static_cast<std::size_t>(predicted[t])] == c;
        const bool a = truth_frames[t] == c;
        tp += p && a;
        fp += p && !a;
        fn += !p && a;
      }
      total += tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    }
    best = std::max(best, total / k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> brute_force_labels(const Eigen::MatrixXd& cost, double beta) {
  const auto T = static_cast<int>(cost.rows());
  const auto K = static_cast<int>(cost.cols());
  std::vector<int> seq(static_cast<std::size_t>(T), 0), best;
  double best_val = std::numeric_limits<double>::infinity();
  while (true) {
    double v = 0.0;
    for (int t = 0; t < T; ++t) {
      v += cost(t, seq[static_cast<std::size_t>(t)]);
      if (t > 0 && seq[static_cast<std::size_t>(t)] != seq[static_cast<std::size_t>(t - 1)]) v += beta;
    }
    if (v < best_val) {
      best_val = v;
      best = seq;
    }
    int i = T - 1;
    while (i >= 0 && seq[static_cast<std::size_t>(i)] == K - 1) seq[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++seq[static_cast<std::size_t>(i)];
  }
  return best;
}

namespace {

double flip(double bit, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  return b(rng) ? 1.0 - bit : bit;
}

}  // namespace

ScmFixture fork_fixture(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd t(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double u = coin(rng) ? 1.0 : 0.0;
    t(i, 0) = u;
    t(i, 1) = flip(u, 0.15, rng);
    t(i, 2) = flip(u, 0.15, rng);
    y(i) = g(rng);
  }
  ScmFixture f{causal::CausalDataset(t, y), {{0, 1}, {0, 2}}, {"U", "A", "B", "Y"}};
  f.data.names = f.names;
  return f;
}

ScmFixture chain_fixture(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd t(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    t(i, 0) = coin(rng) ? 1.0 : 0.0;
    t(i, 1) = flip(t(i, 0), 0.15, rng);
    y(i) = 2.0 * t(i, 1) + g(rng);
  }
  ScmFixture f{causal::CausalDataset(t, y), {{0, 1}, {1, 2}}, {"A", "B", "Y"}};
  f.data.names = f.names;
  return f;
}

ScmFixture diamond_fixture(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd t(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    t(i, 0) = coin(rng) ? 1.0 : 0.0;
    t(i, 1) = flip(t(i, 0), 0.15, rng);
    t(i, 2) = flip(t(i, 0), 0.15, rng);
    y(i) = 2.0 * t(i, 1) + 2.0 * t(i, 2) + g(rng);
  }
  ScmFixture f{causal::CausalDataset(t, y), {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, {"A", "B", "C", "Y"}};
  f.data.names = f.names;
  return f;
}

ConfoundedFixture confounded_fixture(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.1);
  ConfoundedFixture f;
  Eigen::MatrixXd t(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double z = coin(rng) ? 1.0 : 0.0;
    const double x = u01(rng) < 0.2 + 0.6 * z ? 1.0 : 0.0;
    t(i, 0) = z;
    t(i, 1) = x;
    y(i) = f.direct * x + f.confounding * z + g(rng);
  }
  f.data = causal::CausalDataset(t, y);
  return f;
}

double skeleton_f1(const causal::Pag& pag, const std::vector<std::pair<int, int>>& truth) {
  std::set<std::pair<int, int>> want(truth.begin(), truth.end());
  double tp = 0, fp = 0;
  for (const auto& e : pag.edges()) {
    if (want.count({std::min(e.a, e.b), std::max(e.a, e.b)}) != 0) {
      ++tp;
    } else {
      ++fp;
    }
  }
  const double fn = static_cast<double>(want.size()) - tp;
  if (tp == 0) return want.empty() && fp == 0 ? 1.0 : 0.0;
  return 2 * tp / (2 * tp + fp + fn);
}

causal::Dag random_dag(int n, double edge_probability, std::mt19937_64& rng) {
  std::vector<int> order(static_cast<std::size_t>(n - 1));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.push_back(n - 1);
  std::bernoulli_distribution edge(edge_probability);
  causal::Dag dag(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (edge(rng)) dag.add_edge(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  return dag;
}

std::vector<double> brute_force_path_strengths(const causal::Dag& dag, int outcome,
                                               const std::function<double(int, int)>& weight) {
  const int n = dag.size();
  std::vector<double> strength(static_cast<std::size_t>(n), 0.0);
  // Every subset of intermediate nodes, in every order.
  for (int source = 0; source < n; ++source) {
    if (source == outcome) continue;
    std::vector<int> others;
    for (int v = 0; v < n; ++v) {
      if (v != source && v != outcome) others.push_back(v);
    }
    const auto m = others.size();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      std::vector<int> mid;
      for (std::size_t b = 0; b < m; ++b) {
        if ((mask >> b) & 1u) mid.push_back(others[b]);
      }
      std::sort(mid.begin(), mid.end());
      do {
        std::vector<int> path{source};
        path.insert(path.end(), mid.begin(), mid.end());
        path.push_back(outcome);
        bool ok = true;
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < path.size() && ok; ++i) {
          ok = dag.has_edge(path[i], path[i + 1]);
          if (ok) s += weight(path[i], path[i + 1]);
        }
        if (ok) strength[static_cast<std::size_t>(source)] += s;
      } while (std::next_permutation(mid.begin(), mid.end()));
    }
  }
  return strength;
}

tscf::OccurrenceMap make_occurrences(
    const std::vector<std::tuple<series::EpisodeId, int, Eigen::Index, Eigen::Index>>& rows) {
  tscf::OccurrenceMap occ;
  int k = 0;
  for (const auto& [ep, factor, start, end] : rows) {
    occ.add(ep, factor, {start, end});
    k = std::max(k, factor + 1);
  }
  occ.set_factor_count(k);
  return occ;
}

series::ActionTimeSeries make_series(const std::vector<std::vector<double>>& frames, series::EpisodeId id,
                                     double episode_return) {
  series::ActionTimeSeries s;
  s.episode_id = id;
  s.episode_return = episode_return;
  s.frames.resize(static_cast<Eigen::Index>(frames.size()),
                  frames.empty() ? 0 : static_cast<Eigen::Index>(frames.front().size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t j = 0; j < frames[i].size(); ++j) {
      s.frames(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = frames[i][j];
    }
  }
  return s;
}

std::string temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() /
                     ("cier_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace cier::testing
