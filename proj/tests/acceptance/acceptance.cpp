// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//   acceptance            run everything
//   acceptance 3 8        run only the listed criteria

#include "cier/causal.hpp"
#include "cier/error.hpp"
#include "cier/metrics.hpp"
#include "cier/mlp.hpp"
#include "cier/replay.hpp"
#include "cier/sum_tree.hpp"
#include "cier/ticc.hpp"
#include "cier/trainer.hpp"
#include "cier/tscf.hpp"
#include "cier_app/config_io.hpp"
#include "fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace cier;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [fail]");
  }
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

void curriculum(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const replay::CurriculumSchedule s{100, 1.0};
  v.require(replay::mu(0, s) == 1.0, "mu(0)=" + num(replay::mu(0, s), 17));
  v.require(replay::mu(100, s) == 0.0, "mu(100)=" + num(replay::mu(100, s), 17));
  v.require(replay::mu(60, s) == 0.8, "mu(60)=" + num(replay::mu(60, s), 17));
  bool monotone = true;
  for (const replay::CurriculumSchedule sched : {s, replay::CurriculumSchedule{1000, 2.5}}) {
    for (int e = 1; e <= sched.epsilon_m; ++e) monotone &= replay::mu(e, sched) <= replay::mu(e - 1, sched);
  }
  v.require(monotone, "monotone sweep");
  const double dt = seconds_since(t0);
  v.require(dt < 1.0, "runtime " + num(dt, 3) + "s < 1s");
}

void sum_tree(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  replay::SumTree tree(64);
  std::vector<double> priority(64);
  for (std::size_t i = 0; i < 64; ++i) tree.update(i, priority[i] = 0.05 + u(rng));
  std::vector<long long> counts(64, 0);
  for (int i = 0; i < 1'000'000; ++i) ++counts[tree.find(u(rng) * tree.total())];
  std::vector<double> expected(64);
  for (std::size_t i = 0; i < 64; ++i) expected[i] = priority[i] / tree.total();
  const auto gof = metrics::chi_square_gof(counts, expected);
  v.require(gof.p_value > 0.01, "chi-square p=" + num(gof.p_value) + " > 0.01");

  std::uniform_int_distribution<std::size_t> leaf(0, 63);
  for (int i = 0; i < 100'000; ++i) tree.update(leaf(rng), 10.0 * u(rng));
  double sum = 0.0;
  for (std::size_t i = 0; i < 64; ++i) sum += tree.get(i);
  const double drift = std::abs(tree.total() - sum);
  v.require(drift < 1e-9, "|root - sum(leaves)|=" + num(drift) + " < 1e-9");
  const double dt = seconds_since(t0);
  v.require(dt < 30.0, "runtime " + num(dt, 3) + "s < 30s");
}

void ticc_oracle(Verdict& v) {
  ScopedWarningSink quiet([](std::string_view) {});
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> f1;
  int increases = 0, reseeds = 0, steps = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = testing::two_regime_series(seed);
    ticc::TiccParams p;
    p.K = 2;
    p.beta = 50;
    p.seed = seed;
    const auto fit = ticc::fit_ticc(data.series, p);
    f1.push_back(testing::macro_f1(fit.segmentation.labels, data.frame_labels, 2));
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
      ++steps;
      reseeds += fit.reseeded[i] ? 1 : 0;
      if (fit.objective_trace[i] > fit.objective_trace[i - 1] + 1e-9 * std::abs(fit.objective_trace[i - 1])) {
        ++increases;
      }
    }
  }
  const double med = metrics::median(f1);
  v.require(med >= 0.9, "median F1=" + num(med) + " >= 0.9 (min " + num(*std::min_element(f1.begin(), f1.end())) + ")");
  v.require(increases == 0, "objective increases " + std::to_string(increases) + "/" + std::to_string(steps) +
                                " EM steps (" + std::to_string(reseeds) + " after cluster repair)");

  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  int mismatches = 0, cases = 0;
  for (int T = 1; T <= 12; ++T) {
    for (int K = 1; K <= 3; ++K) {
      for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd cost(T, K);
        for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
        const double beta = u(rng);
        ++cases;
        if (ticc::assign_labels(cost, beta) != testing::brute_force_labels(cost, beta)) ++mismatches;
      }
    }
  }
  v.require(mismatches == 0, "DP vs enumeration " + std::to_string(cases - mismatches) + "/" +
                                 std::to_string(cases) + " exact");
  const double dt = seconds_since(t0);
  v.require(dt < 120.0, "runtime " + num(dt, 3) + "s < 120s");
}

void dtw_medoids(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(20, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  v.require(tscf::dtw(x, x) == 0.0, "dtw(x,x)=" + num(tscf::dtw(x, x)));
  const double two = tscf::dtw(Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Ones(2, 1));
  v.require(std::abs(two - 2.0) < 1e-12, "dtw([0,0],[1,1])=" + num(two, 17));

  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<series::Subsequence> segs;
  std::vector<int> family;
  for (int i = 0; i < 40; ++i) {
    const int fam = i % 2;
    series::Subsequence s;
    s.episode_id = i;
    s.values.resize(8, 1);
    for (Eigen::Index t = 0; t < 8; ++t) {
      s.values(t, 0) = (fam == 0 ? 0.5 : static_cast<double>(t) / 7.0) + noise(rng);
    }
    s.end = 7;
    segs.push_back(std::move(s));
    family.push_back(fam);
  }
  const auto dict = tscf::cluster_factors(segs, 2, 1);
  std::size_t hits = 0;
  for (const auto& f : dict.factors) {
    std::map<int, std::size_t> c;
    for (auto m : f.members) ++c[family[m]];
    std::size_t best = 0;
    for (auto [k, n] : c) best = std::max(best, n);
    hits += best;
  }
  const double purity = static_cast<double>(hits) / static_cast<double>(family.size());
  v.require(purity == 1.0, "two-motif purity=" + num(purity));
  const double dt = seconds_since(t0);
  v.require(dt < 30.0, "runtime " + num(dt, 3) + "s < 30s");
}

void causal_recovery(Verdict& v) {
  ScopedWarningSink quiet([](std::string_view) {});
  const auto t0 = std::chrono::steady_clock::now();
  using Maker = std::function<testing::ScmFixture(std::uint64_t)>;
  const std::vector<std::pair<std::string, Maker>> fixtures{
      {"fork", [](std::uint64_t s) { return testing::fork_fixture(s); }},
      {"chain", [](std::uint64_t s) { return testing::chain_fixture(s); }},
      {"diamond", [](std::uint64_t s) { return testing::diamond_fixture(s); }}};
  for (const auto& [name, make] : fixtures) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto f = make(seed);
      causal::GfciOptions opt;
      opt.seed = seed;
      if (testing::skeleton_f1(causal::gfci_lite(f.data, opt).pag, f.skeleton) >= 0.8) ++good;
    }
    v.require(good >= 16, name + " F1>=0.8 in " + std::to_string(good) + "/20");
  }

  double worst_bias = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = testing::confounded_fixture(seed);
    const double raw = causal::ate(f.data, 1, 2, {}).value;
    const double adjusted = causal::ate(f.data, 1, 2, std::vector<int>{0}).value;
    worst_bias = std::max(worst_bias, std::abs((raw - adjusted) - f.bias()));
  }
  v.require(worst_bias <= 0.1, "confounding gap error max " + num(worst_bias) + " <= 0.1 over 20 seeds");

  double worst_ate = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> g(0.0, 0.1);
    Eigen::MatrixXd t(2000, 1);
    Eigen::VectorXd y(2000);
    for (int i = 0; i < 2000; ++i) {
      t(i, 0) = coin(rng) ? 1.0 : 0.0;
      y(i) = 2.0 * t(i, 0) + g(rng);
    }
    worst_ate = std::max(worst_ate, std::abs(causal::ate(causal::CausalDataset(t, y), 0, 1, {}).value - 2.0));
  }
  v.require(worst_ate <= 0.05, "ate(y=2U+N(0,0.1^2)) error max " + num(worst_ate) + " <= 0.05 over 20 seeds");
  const double dt = seconds_since(t0);
  v.require(dt < 120.0, "runtime " + num(dt, 3) + "s < 120s");
}

void time_correction(Verdict& v) {
  ScopedWarningSink quiet([](std::string_view) {});
  using EM = causal::EndpointMark;
  std::mt19937_64 rng(6);
  int oriented = 0;
  for (int run = 0; run < 100; ++run) {
    causal::Pag pag(3, 2);
    pag.set_edge(0, EM::Circle, 1, EM::Circle);
    std::vector<std::tuple<series::EpisodeId, int, Eigen::Index, Eigen::Index>> rows;
    for (int ep = 0; ep < 30; ++ep) {
      const auto a = static_cast<Eigen::Index>(rng() % 20);
      const auto b = a + 1 + static_cast<Eigen::Index>(rng() % 20);
      rows.emplace_back(ep, 0, a, a + 2);
      rows.emplace_back(ep, 1, b, b + 2);
    }
    if (causal::time_correction(pag, testing::make_occurrences(rows)).directed(0, 1)) ++oriented;
  }
  v.require(oriented == 100, "A o-o B oriented A->B in " + std::to_string(oriented) + "/100 runs");

  const EM marks[] = {EM::Tail, EM::Arrow, EM::Circle};
  int dags = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 6);
    causal::Pag pag(n, n - 1);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (rng() % 2) pag.set_edge(a, marks[rng() % 3], b, marks[rng() % 3]);
    std::vector<std::tuple<series::EpisodeId, int, Eigen::Index, Eigen::Index>> rows;
    for (int ep = 0; ep < 10; ++ep)
      for (int k = 0; k < n - 1; ++k)
        if (rng() % 3) {
          const auto s = static_cast<Eigen::Index>(rng() % 40);
          rows.emplace_back(ep, k, s, s + 3);
        }
    const causal::Dag dag = causal::time_correction(pag, testing::make_occurrences(rows)).to_dag();
    if (dag.is_acyclic() && dag.children(n - 1).empty()) ++dags;
  }
  v.require(dags == 200, "DAG check passed on " + std::to_string(dags) + "/200 random graphs");
}

void path_strengths(Verdict& v) {
  std::mt19937_64 rng(7);
  // Edge strengths are absolute effects, so the weights are non-negative.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int graphs = 0, exact = 0;
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n) {
    for (double density : {0.2, 0.5, 0.8}) {
      for (int rep = 0; rep < 40; ++rep) {
        const causal::Dag dag = testing::random_dag(n, density, rng);
        Eigen::MatrixXd w(n, n);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
        auto weight = [&](int a, int b) { return w(a, b); };
        const auto table = causal::path_strengths(dag, n - 1, weight);
        const auto brute = testing::brute_force_path_strengths(dag, n - 1, weight);
        bool same = table.factors.size() == static_cast<std::size_t>(n - 1);
        for (const auto& f : table.factors) {
          const double b = brute[static_cast<std::size_t>(f.factor)];
          const double err = std::abs(f.strength - b) / std::max(1.0, std::abs(b));
          worst = std::max(worst, err);
          same &= err <= 1e-12;
        }
        ++graphs;
        exact += same ? 1 : 0;
      }
    }
  }
  v.require(exact == graphs, std::to_string(exact) + "/" + std::to_string(graphs) +
                                 " graphs match enumeration (max rel. error " + num(worst) + ", tol 1e-12)");
}

double relative_gradient_error(const rl::Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& up) {
  rl::Mlp::Cache cache;
  net.forward(x, cache);
  const auto grads = net.backward(cache, up);
  const Eigen::VectorXd theta = net.parameters();
  const double h = 1e-5;
  auto loss = [&](const Eigen::VectorXd& p) {
    rl::Mlp copy = net;
    copy.set_parameters(p);
    return up.cwiseProduct(copy.forward(x)).sum();
  };
  Eigen::VectorXd numeric(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd plus = theta, minus = theta;
    plus[i] += h;
    minus[i] -= h;
    numeric[i] = (loss(plus) - loss(minus)) / (2.0 * h);
  }
  Eigen::MatrixXd numeric_input(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::MatrixXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    numeric_input(i) = (up.cwiseProduct(net.forward(xp)).sum() - up.cwiseProduct(net.forward(xm)).sum()) / (2.0 * h);
  }
  auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-12});
    return (a - b).norm() / scale;
  };
  return std::max(rel(grads.flatten(), numeric), rel(grads.input, numeric_input));
}

void gradient_checks(Verdict& v) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> width(2, 12);
  double worst = 0.0;
  for (int config = 0; config < 10; ++config) {
    const int state = width(rng);
    const int action = 1 + config % 3;
    std::vector<int> hidden;
    for (int l = 0; l < 1 + config % 3; ++l) hidden.push_back(width(rng));
    std::vector<int> actor_sizes{state};
    actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
    actor_sizes.push_back(action);
    std::vector<int> critic_sizes{state + action};
    critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
    critic_sizes.push_back(1);

    rl::Mlp actor(actor_sizes, rl::OutputActivation::ScaledTanh, rng, 0.5);
    actor.set_output_range(Eigen::VectorXd::Constant(action, -2.0), Eigen::VectorXd::Constant(action, 1.0));
    rl::Mlp critic(critic_sizes, rl::OutputActivation::Linear, rng, 0.5);
    const int batch = 4;
    const Eigen::MatrixXd xs = Eigen::MatrixXd::NullaryExpr(state, batch, [&] { return g(rng); });
    const Eigen::MatrixXd xc = Eigen::MatrixXd::NullaryExpr(state + action, batch, [&] { return g(rng); });
    const Eigen::MatrixXd ua = Eigen::MatrixXd::NullaryExpr(action, batch, [&] { return g(rng); });
    const Eigen::MatrixXd uc = Eigen::MatrixXd::NullaryExpr(1, batch, [&] { return g(rng); });
    worst = std::max({worst, relative_gradient_error(actor, xs, ua), relative_gradient_error(critic, xc, uc)});
  }
  v.require(worst < 1e-4, "max relative error " + num(worst) + " < 1e-4 over 10 actor/critic pairs");
}

// ---------------------------------------------------------------------------
// End-to-end runs shared by criteria 9 and 10.

struct EndToEnd {
  std::map<replay::ReplayMode, std::vector<rl::RunResult>> runs;
  double seconds = 0.0;
};

const std::vector<std::uint64_t>& e2e_seeds() {
  static const std::vector<std::uint64_t> seeds = [] {
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 0; i < 20; ++i) s.push_back(i);
    return s;
  }();
  return seeds;
}

const EndToEnd& end_to_end() {
  static const EndToEnd result = [] {
    ScopedWarningSink quiet([](std::string_view) {});
    EndToEnd e;
    const auto t0 = std::chrono::steady_clock::now();
    app::ExperimentConfig cfg = app::default_experiment();
    cfg.train.agent.algorithm = rl::Algorithm::Ddpg;
    app::finalize(cfg);
    for (replay::ReplayMode mode : {replay::ReplayMode::Uniform, replay::ReplayMode::Cier, replay::ReplayMode::Ciper}) {
      for (std::uint64_t seed : e2e_seeds()) {
        rl::TrainConfig t = cfg.train;
        t.replay.mode = mode;
        t.seed = seed;
        e.runs[mode].push_back(rl::train(t));
      }
      std::cerr << "  trained " << replay::to_string(mode) << " x" << e2e_seeds().size() << " ("
                << num(seconds_since(t0), 4) << "s)\n";
    }
    e.seconds = seconds_since(t0);
    return e;
  }();
  return result;
}

std::vector<std::vector<double>> scores_of(const std::vector<rl::RunResult>& runs) {
  std::vector<std::vector<double>> out;
  for (const auto& r : runs) out.push_back(r.scores);
  return out;
}

void cier_benefit(Verdict& v) {
  const EndToEnd& e = end_to_end();
  const auto& uniform = e.runs.at(replay::ReplayMode::Uniform);
  const auto& cier = e.runs.at(replay::ReplayMode::Cier);
  const auto report = metrics::compare_runs(scores_of(uniform), scores_of(cier));
  v.require(report.speed_test.p_value < 0.05,
            "episodes to uniform AS: uniform median " + num(report.baseline_episodes_median) + ", cier median " +
                num(report.treatment_episodes_median) + ", Wilcoxon p=" + num(report.speed_test.p_value) + " < 0.05");
  std::size_t snapshots = 0, relevant = 0;
  for (const auto& r : cier) {
    for (std::size_t i = r.snapshots.size() > 1 ? 1 : 0; i < r.snapshots.size(); ++i) {
      ++snapshots;
      relevant += r.snapshots[i].planted_relevant ? 1 : 0;
    }
  }
  const double share = snapshots ? static_cast<double>(relevant) / static_cast<double>(snapshots) : 0.0;
  v.require(share >= 0.7, "planted factor relevant in " + std::to_string(relevant) + "/" + std::to_string(snapshots) +
                              " snapshots (" + num(share, 3) + ") >= 0.7");
  v.require(e.seconds < 1800.0, "end-to-end runtime " + num(e.seconds, 4) + "s < 1800s");
}

void metrics_and_ciper(Verdict& v) {
  struct Fixture {
    std::vector<double> scores;
    metrics::Metrics want;
  };
  const std::vector<Fixture> fixtures{{{1, 2, 3}, {2.0, 3.0, 2, 10.0 / 3.0}},
                                      {{5, 5}, {5.0, 5.0, 1, 7.5}},
                                      {{3, 1, 2}, {2.0, 3.0, 1, 13.0 / 3.0}}};
  int ok = 0;
  for (const auto& f : fixtures) {
    const auto m = metrics::compute_metrics(f.scores);
    ok += m.as == f.want.as && m.bs == f.want.bs && m.sas == f.want.sas && std::abs(m.acs - f.want.acs) < 1e-12;
  }
  v.require(ok == 3, std::to_string(ok) + "/3 metric fixtures exact");

  const EndToEnd& e = end_to_end();
  const auto uniform = scores_of(e.runs.at(replay::ReplayMode::Uniform));
  const auto cier = metrics::compare_runs(uniform, scores_of(e.runs.at(replay::ReplayMode::Cier)));
  const auto ciper = metrics::compare_runs(uniform, scores_of(e.runs.at(replay::ReplayMode::Ciper)));
  const double a = cier.treatment_episodes_median;
  const double b = ciper.treatment_episodes_median;
  v.require(b <= 1.2 * a, "median episodes to uniform AS: ciper " + num(b) + " <= 1.2 x cier " + num(a));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"curriculum schedule", curriculum},
      {"sum tree conformance", sum_tree},
      {"TICC oracle", ticc_oracle},
      {"DTW and medoids", dtw_medoids},
      {"causal recovery", causal_recovery},
      {"time correction", time_correction},
      {"path strengths", path_strengths},
      {"gradient checks", gradient_checks},
      {"end-to-end CIER benefit", cier_benefit},
      {"metrics and CIPER non-inferiority", metrics_and_ciper}};

  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failures += v.pass ? 0 : 1;
    std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << v.detail.str() << " (" << num(seconds_since(t0), 3) << "s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
