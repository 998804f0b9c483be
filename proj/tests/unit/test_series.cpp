#include "cier/envs.hpp"
#include "cier/episode_log.hpp"
#include "cier/error.hpp"
#include "cier/series.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace cier;
using namespace cier::series;

namespace {

Transition step(EpisodeId ep, std::int64_t k, std::vector<double> action, double reward) {
  Transition t;
  t.episode_id = ep;
  t.step_index = k;
  t.action = Eigen::Map<Eigen::VectorXd>(action.data(), static_cast<Eigen::Index>(action.size()));
  t.state = Eigen::VectorXd::Constant(2, static_cast<double>(k));
  t.next_state = Eigen::VectorXd::Constant(2, static_cast<double>(k + 1));
  t.reward = reward;
  return t;
}

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("build_series on a single transition") {
  const std::vector<Transition> log{step(3, 0, {0.5, -0.2}, 1.0)};
  const auto s = build_series(log);
  CHECK(s.episode_id == 3);
  CHECK(s.length() == 1);
  CHECK(s.dim() == 2);
  CHECK(s.frames(0, 0) == 0.5);
  CHECK(s.frames(0, 1) == -0.2);
  CHECK(s.episode_return == 1.0);
}

TEST_CASE("build_series sums rewards") {
  const std::vector<Transition> log{step(0, 0, {0.1}, 1), step(0, 1, {0.2}, 2), step(0, 2, {0.3}, 3)};
  const auto s = build_series(log);
  CHECK(s.length() == 3);
  CHECK(s.episode_return == 6.0);
}

TEST_CASE("build_series errors") {
  CHECK(code_of([] { build_series(std::vector<Transition>{}); }) == Errc::EmptyEpisode);
  CHECK(code_of([] { build_series(std::vector<Transition>{step(0, 0, {0}, 0), step(1, 1, {0}, 0)}); }) ==
        Errc::MixedEpisodes);
  CHECK(code_of([] { build_series(std::vector<Transition>{step(0, 0, {0}, 0), step(0, 2, {0}, 0)}); }) ==
        Errc::NonContiguousSteps);
  CHECK(code_of([] { build_series(std::vector<Transition>{step(0, 0, {0}, 0), step(0, 1, {0, 1}, 0)}); }) ==
        Errc::DimensionMismatch);
}

TEST_CASE("znormalize examples") {
  const auto two = znormalize(testing::make_series({{1}, {3}}));
  CHECK(two.frames(0, 0) == doctest::Approx(-1.0));
  CHECK(two.frames(1, 0) == doctest::Approx(1.0));
  const auto flat = znormalize(testing::make_series({{5}, {5}, {5}}));
  CHECK(flat.frames.cwiseAbs().maxCoeff() == 0.0);
  CHECK(code_of([] { znormalize(testing::make_series({{1}})); }) == Errc::TooShort);
}

TEST_CASE("znormalize gives zero mean and unit population variance") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(3.0, 2.5);
  ActionTimeSeries s;
  s.frames.resize(100, 3);
  for (Eigen::Index i = 0; i < 100; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) s.frames(i, j) = g(rng) * static_cast<double>(j + 1);
  const auto z = znormalize(s);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double mean = z.frames.col(j).mean();
    const double var = (z.frames.col(j).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-9);
  }
}

TEST_CASE("window_stack examples") {
  const auto s = testing::make_series({{1}, {2}, {3}});
  const Eigen::MatrixXd w2 = window_stack(s, 2);
  REQUIRE(w2.rows() == 2);
  REQUIRE(w2.cols() == 2);
  CHECK(w2(0, 0) == 1);
  CHECK(w2(0, 1) == 2);
  CHECK(w2(1, 0) == 2);
  CHECK(w2(1, 1) == 3);
  CHECK(window_stack(s, 1) == s.frames);
  CHECK(code_of([&] { window_stack(s, 4); }) == Errc::WindowTooLarge);
}

TEST_CASE("window_stack concatenates frames in order") {
  const auto s = testing::make_series({{1, 10}, {2, 20}, {3, 30}, {4, 40}, {5, 50}});
  const Eigen::MatrixXd w = window_stack(s, 3);
  REQUIRE(w.rows() == 3);
  REQUIRE(w.cols() == 6);
  for (Eigen::Index t = 0; t < 3; ++t) {
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(w(t, 2 * k) == s.frames(t + k, 0));
      CHECK(w(t, 2 * k + 1) == s.frames(t + k, 1));
    }
  }
}

TEST_CASE("slice keeps the episode and bounds") {
  const auto s = testing::make_series({{1}, {2}, {3}, {4}}, 7);
  const auto sub = slice(s, 1, 2);
  CHECK(sub.episode_id == 7);
  CHECK(sub.length() == 2);
  CHECK(sub.values(0, 0) == 2);
  CHECK(sub.values(1, 0) == 3);
  CHECK_THROWS_AS(slice(s, 2, 5), Error);
}

TEST_CASE("group_by_episode keeps first-seen order") {
  const std::vector<Transition> log{step(5, 0, {0}, 0), step(2, 0, {0}, 0), step(5, 1, {0}, 0), step(2, 1, {0}, 0)};
  const auto groups = group_by_episode(log);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].front().episode_id == 5);
  CHECK(groups[0].size() == 2);
  CHECK(groups[1].front().episode_id == 2);
}

TEST_CASE("planted environment log round-trips bitwise") {
  ScopedWarningSink quiet([](std::string_view) {});
  rl::PlantedFactorEnv env;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Transition> log;
  for (EpisodeId ep = 0; ep < 3; ++ep) {
    Eigen::VectorXd state = env.reset(static_cast<std::uint64_t>(ep));
    std::int64_t k = 0;
    while (!env.finished()) {
      Eigen::VectorXd a(env.spec().action_dim);
      for (Eigen::Index j = 0; j < a.size(); ++j) a(j) = u(rng);
      const auto r = env.step(a);
      log.push_back({state, a, r.reward, r.next_state, r.done, ep, k++});
      state = r.next_state;
    }
  }
  std::stringstream csv;
  write_episode_log(csv, log);
  const auto back = read_episode_log(csv);
  REQUIRE(back.size() == log.size());
  const auto groups = group_by_episode(back);
  REQUIRE(groups.size() == 3);
  std::size_t offset = 0;
  for (const auto& g : groups) {
    const auto s = build_series(g);
    for (Eigen::Index t = 0; t < s.length(); ++t) {
      CHECK(s.frames.row(t).transpose() == log[offset + static_cast<std::size_t>(t)].action);
    }
    offset += g.size();
  }
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(back[i].reward == log[i].reward);
    CHECK(back[i].state == log[i].state);
  }
}

TEST_CASE("read_episode_log rejects malformed input") {
  std::stringstream bad_header("a,b,c\n");
  CHECK_THROWS_AS(read_episode_log(bad_header), Error);
  std::stringstream bad_value("episode,step,reward,done,a0\n0,0,x,0,1\n");
  CHECK_THROWS_AS(read_episode_log(bad_value), Error);
}
