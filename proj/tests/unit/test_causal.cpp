#include "cier/causal.hpp"
#include "cier/error.hpp"
#include "fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace cier;
using namespace cier::causal;
using EM = EndpointMark;

namespace {

CausalDataset binary_pair(std::uint64_t seed, int n, bool copy) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd t(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    t(i, 0) = coin(rng);
    t(i, 1) = copy ? t(i, 0) : coin(rng);
    y(i) = g(rng);
  }
  return {t, y};
}

int errors_with(Errc code, const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code ? 1 : 0;
  }
  return 0;
}

}  // namespace

TEST_CASE("ci_test is calibrated under independence") {
  int rejections = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    const auto d = binary_pair(static_cast<std::uint64_t>(rep), 2000, false);
    if (ci_test(d, 0, 1, {}).p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}

TEST_CASE("ci_test detects perfect dependence") {
  const auto d = binary_pair(1, 100, true);
  const auto r = ci_test(d, 0, 1, {});
  CHECK(r.p_value < 1e-6);
  CHECK(r.df == 1);
}

TEST_CASE("ci_test accepts a chain given its middle node") {
  int kept = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto f = testing::chain_fixture(rep);
    // A -> B -> Y: A independent of Y given B (Fisher-z path, Y continuous).
    const std::vector<int> z{1};
    if (ci_test(f.data, 0, 2, z).p_value >= 0.01) ++kept;
  }
  CHECK(kept >= 45);
}

TEST_CASE("ci_test stratified G2 on a binary chain") {
  int kept = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto f = testing::fork_fixture(rep);
    const std::vector<int> z{0};
    if (ci_test(f.data, 1, 2, z).p_value >= 0.01) ++kept;
    CHECK(ci_test(f.data, 1, 2, {}).p_value < 1e-6);
  }
  CHECK(kept >= 45);
}

TEST_CASE("bic prefers the true edge") {
  const auto f = testing::chain_fixture(3, 1000);
  Dag empty(3), edge(3);
  edge.add_edge(1, 2);
  CHECK(bic_score(edge, f.data) > bic_score(empty, f.data));
}

TEST_CASE("bic penalizes an irrelevant parent") {
  int held = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = binary_pair(seed + 100, 1000, false);
    Dag empty(3), extra(3);
    extra.add_edge(0, 1);
    if (bic_score(extra, d) < bic_score(empty, d)) ++held;
  }
  CHECK(held >= 18);
}

TEST_CASE("bic of single nodes in closed form") {
  Eigen::MatrixXd t(4, 1);
  t << 1, 0, 1, 1;
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 3.0, 6.0;
  const CausalDataset d(t, y);
  const double logn = std::log(4.0);
  CHECK(local_bic(d, 0, {}) == doctest::Approx(3 * std::log(0.75) + std::log(0.25) - 0.5 * logn));
  const double var = (4.0 + 1.0 + 0.0 + 9.0) / 4.0;  // mean 3
  const double ll = -2.0 * (std::log(2 * std::numbers::pi * var) + 1.0);
  CHECK(local_bic(d, 1, {}) == doctest::Approx(ll - logn));
  Dag cyc(2);
  cyc.add_edge(0, 1);
  cyc.add_edge(1, 0);
  CHECK(errors_with(Errc::NotADag, [&] { bic_score(cyc, d); }) == 1);
}

TEST_CASE("hill climb only accepts improving moves") {
  const auto f = testing::diamond_fixture(4);
  std::vector<double> trace;
  const Dag g = hill_climb(f.data, Dag(f.data.node_count()), &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] > trace[i - 1]);
  CHECK(trace.back() == doctest::Approx(bic_score(g, f.data)));
  CHECK(g.is_acyclic());
  CHECK(g.children(f.data.outcome()).empty());
}

TEST_CASE("gfci recovers the fork skeleton") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = testing::fork_fixture(seed);
    GfciOptions opt;
    opt.seed = seed;
    const auto r = gfci_lite(f.data, opt);
    if (testing::skeleton_f1(r.pag, f.skeleton) == 1.0) ++exact;
    CHECK_FALSE(r.pag.adjacent(1, 2));
  }
  CHECK(exact >= 16);
}

TEST_CASE("gfci leaves independent columns unconnected") {
  int empty = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd t(2000, 3);
    Eigen::VectorXd y(2000);
    for (int i = 0; i < 2000; ++i) {
      for (int j = 0; j < 3; ++j) t(i, j) = coin(rng);
      y(i) = g(rng);
    }
    GfciOptions opt;
    opt.seed = seed;
    if (gfci_lite(CausalDataset(t, y), opt).pag.edges().empty()) ++empty;
  }
  CHECK(empty >= 16);
}

TEST_CASE("gfci separates the ends of a chain by its middle") {
  const auto f = testing::chain_fixture(6);
  const auto r = gfci_lite(f.data);
  CHECK(r.pag.adjacent(0, 1));
  CHECK(r.pag.adjacent(1, 2));
  CHECK_FALSE(r.pag.adjacent(0, 2));
  // Pairs already separated by the score phase carry no recorded sepset.
  const auto it = r.sepsets.find({0, 2});
  if (it != r.sepsets.end()) CHECK(it->second == std::vector<int>{1});
  const std::vector<int> z{1};
  CHECK(ci_test(f.data, 0, 2, z).p_value > 0.01);
}

TEST_CASE("time correction follows first-occurrence precedence") {
  Pag pag(3, 2);
  pag.set_edge(0, EM::Circle, 1, EM::Circle);
  std::vector<std::tuple<series::EpisodeId, int, Eigen::Index, Eigen::Index>> rows;
  for (int ep = 0; ep < 50; ++ep) {
    rows.emplace_back(ep, 0, ep % 3, ep % 3 + 2);
    rows.emplace_back(ep, 1, 5 + ep % 4, 9 + ep % 4);
  }
  const auto occ = testing::make_occurrences(rows);
  CHECK(precedence(occ, 0, 1) == doctest::Approx(1.0));
  const Pag out = time_correction(pag, occ);
  CHECK(out.directed(0, 1));
}

TEST_CASE("time correction tie goes to the lower id") {
  Pag pag(7, 6);
  pag.set_edge(2, EM::Circle, 5, EM::Circle);
  const auto occ = testing::make_occurrences({{0, 2, 0, 1}, {0, 5, 3, 4}, {1, 5, 0, 1}, {1, 2, 3, 4}});
  CHECK(precedence(occ, 2, 5) == doctest::Approx(0.5));
  CHECK(time_correction(pag, occ).directed(2, 5));
}

TEST_CASE("time correction orients outcome edges into the outcome") {
  Pag pag(2, 1);
  pag.set_edge(0, EM::Circle, 1, EM::Arrow);
  const auto occ = testing::make_occurrences({{0, 0, 0, 3}});
  CHECK(time_correction(pag, occ).directed(0, 1));

  Pag back(2, 1);
  back.set_edge(1, EM::Tail, 0, EM::Arrow);
  CHECK(time_correction(back, occ).directed(0, 1));
}

TEST_CASE("time correction resolves bidirected edges by precedence") {
  Pag pag(3, 2);
  pag.set_edge(0, EM::Arrow, 1, EM::Arrow);
  const auto occ = testing::make_occurrences({{0, 1, 0, 2}, {0, 0, 4, 6}, {1, 1, 1, 2}, {1, 0, 3, 5}});
  CHECK(time_correction(pag, occ).directed(1, 0));
}

TEST_CASE("time correction without co-occurrence uses marginal medians") {
  Pag pag(3, 2);
  pag.set_edge(0, EM::Circle, 1, EM::Circle);
  const auto occ = testing::make_occurrences({{0, 0, 8, 9}, {1, 0, 7, 9}, {2, 1, 1, 2}, {3, 1, 0, 2}});
  CHECK_FALSE(precedence(occ, 0, 1).has_value());
  std::vector<std::string> warnings;
  CHECK(time_correction(pag, occ, &warnings).directed(1, 0));
}

TEST_CASE("time correction always yields a DAG with the outcome as sink") {
  std::mt19937_64 rng(21);
  const EM marks[] = {EM::Tail, EM::Arrow, EM::Circle};
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 6);
    Pag pag(n, n - 1);
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
    const auto occ = testing::make_occurrences(rows);
    const Pag out = time_correction(pag, occ);
    const Dag dag = out.to_dag();
    CHECK(dag.is_acyclic());
    CHECK(dag.children(n - 1).empty());
    CHECK(out.edges().size() == pag.edges().size());
  }
}

TEST_CASE("ate on a linear outcome") {
  std::mt19937_64 rng(2);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> g(0.0, 0.1);
  Eigen::MatrixXd t(2000, 2);
  Eigen::VectorXd y(2000);
  for (int i = 0; i < 2000; ++i) {
    t(i, 0) = coin(rng);
    t(i, 1) = coin(rng);
    y(i) = 2.0 * t(i, 0) + g(rng);
  }
  const CausalDataset d(t, y);
  CHECK(std::abs(ate(d, 0, 2, {}).value - 2.0) < 0.05);
  CHECK(std::abs(ate(d, 1, 2, {}).value) < 0.1);

  double s1 = 0, n1 = 0, s0 = 0, n0 = 0;
  for (int i = 0; i < 2000; ++i) (t(i, 0) != 0 ? s1 : s0) += y(i), (t(i, 0) != 0 ? n1 : n0) += 1;
  CHECK(ate(d, 0, 2, {}).value == doctest::Approx(s1 / n1 - s0 / n0).epsilon(1e-12));
}

TEST_CASE("backdoor adjustment removes confounding bias") {
  const auto f = testing::confounded_fixture(3);
  const std::vector<int> z{0};
  const double adjusted = ate(f.data, 1, 2, z).value;
  const double raw = ate(f.data, 1, 2, {}).value;
  CHECK(std::abs(adjusted - f.direct) < 0.1);
  CHECK(std::abs((raw - adjusted) - f.bias()) < 0.1);
}

TEST_CASE("ate without overlap") {
  Eigen::MatrixXd t(4, 1);
  t << 1, 1, 1, 1;
  const CausalDataset d(t, Eigen::VectorXd::Ones(4));
  CHECK(errors_with(Errc::NoOverlap, [&] { ate(d, 0, 1, {}); }) == 1);
}

TEST_CASE("path strength examples") {
  Dag single(2);
  single.add_edge(0, 1);
  auto t = path_strengths(single, 1, [](int, int) { return 2.0; });
  CHECK(t.factors[0].strength == 2.0);
  CHECK(t.factors[0].relevant);

  Dag chain(3);
  chain.add_edge(0, 1);
  chain.add_edge(1, 2);
  auto w = [](int a, int) { return a == 0 ? 1.0 : 0.5; };
  t = path_strengths(chain, 2, w);
  CHECK(t.factors[0].strength == doctest::Approx(1.5));
  CHECK(t.factors[1].strength == doctest::Approx(0.5));
  t = path_strengths(chain, 2, w, PathAggregation::Product);
  CHECK(t.factors[0].strength == doctest::Approx(0.5));

  Dag diamond(4);
  diamond.add_edge(0, 1);
  diamond.add_edge(0, 2);
  diamond.add_edge(1, 3);
  diamond.add_edge(2, 3);
  auto dw = [](int a, int b) { return 0.1 * (a + 1) + 0.01 * b; };
  t = path_strengths(diamond, 3, dw);
  const auto brute = testing::brute_force_path_strengths(diamond, 3, dw);
  CHECK(t.factors[0].paths.size() == 2);
  CHECK(t.factors[0].strength == doctest::Approx(brute[0]).epsilon(1e-15));

  Dag cyc(2);
  cyc.add_edge(0, 1);
  cyc.add_edge(1, 0);
  CHECK(errors_with(Errc::GraphCycle, [&] { path_strengths(cyc, 1, w); }) == 1);
}

TEST_CASE("path strengths equal brute-force enumeration on small graphs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const Dag dag = testing::random_dag(n, 0.5, rng);
    Eigen::MatrixXd weights(n, n);
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = u(rng);
    auto w = [&](int a, int b) { return weights(a, b); };
    const auto table = path_strengths(dag, n - 1, w);
    const auto brute = testing::brute_force_path_strengths(dag, n - 1, w);
    for (const auto& f : table.factors) {
      CHECK(f.strength == doctest::Approx(brute[static_cast<std::size_t>(f.factor)]).epsilon(1e-12));
      CHECK(f.paths.size() == directed_paths(dag, f.factor, n - 1).size());
    }
  }
}

TEST_CASE("data-driven path strengths use adjusted edge effects") {
  const auto f = testing::chain_fixture(8);
  Pag pag(3, 2);
  pag.set_edge(0, EM::Tail, 1, EM::Arrow);
  pag.set_edge(1, EM::Tail, 2, EM::Arrow);
  const auto t = path_strengths(pag, f.data);
  const double ab = std::abs(ate(f.data, 0, 1, std::vector<int>{}).value);
  const double by = std::abs(ate(f.data, 1, 2, std::vector<int>{}).value);
  CHECK(t.factors[0].strength == doctest::Approx(ab + by));
  CHECK(t.factors[1].strength == doctest::Approx(by));
  const auto json = nlohmann::json::parse(effects_to_json(t, f.names));
  CHECK(json.dump().find("\"B\"") != std::string::npos);
}

TEST_CASE("dot export carries endpoint marks") {
  Pag pag(3, 2);
  pag.set_edge(0, EM::Circle, 1, EM::Arrow);
  pag.set_edge(1, EM::Tail, 2, EM::Arrow);
  const std::vector<std::string> names{"A", "B", "Y"};
  const std::string dot = to_dot(pag, names);
  CHECK(dot.find("\"A\" -> \"B\"") != std::string::npos);
  CHECK(dot.find("mark=\"o>\"") != std::string::npos);
  CHECK(dot.find("mark=\"->\"") != std::string::npos);
}

TEST_CASE("dag utilities") {
  Dag g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  CHECK(g.reachable(0, 2));
  CHECK_FALSE(g.reachable(2, 0));
  CHECK(g.is_acyclic());
  g.add_edge(2, 0);
  CHECK_FALSE(g.is_acyclic());
  CHECK(g.edge_count() == 3);
  CHECK(directed_paths(Dag(3), 0, 2).empty());
}
