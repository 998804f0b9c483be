#include "cier_app/app.hpp"

#include "cier/causal.hpp"
#include "cier/episode_log.hpp"
#include "cier/error.hpp"
#include "cier/metrics.hpp"
#include "cier/replay.hpp"
#include "cier/series.hpp"
#include "cier/ticc.hpp"
#include "cier/trainer.hpp"
#include "cier/tscf.hpp"
#include "cier_app/config_io.hpp"
#include "cier_app/manifest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace cier::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigError:
    case Errc::InvalidParams:
    case Errc::IoError:
      return Usage;
    case Errc::NotPositiveDefinite:
    case Errc::Diverged:
    case Errc::InternalInconsistency:
    case Errc::GraphCycle:
    case Errc::NotADag:
      return NumericalFailure;
    default:
      return DataError;
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  return in;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << text;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string scores_csv(const std::vector<double>& scores) {
  std::ostringstream out;
  out << "episode,score\n";
  out.precision(17);
  for (std::size_t i = 0; i < scores.size(); ++i) out << i + 1 << ',' << scores[i] << '\n';
  return out.str();
}

std::vector<double> read_scores(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, path + " is empty");
  if (line.rfind("episode,score", 0) != 0) fail(Errc::ParseError, path + ": header must be episode,score");
  std::vector<double> scores;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(Errc::ParseError, path + ":" + std::to_string(row) + ": expected two fields");
    try {
      std::size_t used = 0;
      std::string field = line.substr(comma + 1);
      while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
      scores.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      fail(Errc::ParseError, path + ":" + std::to_string(row) + ": not a number");
    }
  }
  if (scores.empty()) fail(Errc::EmptyScores, path + " has no scores");
  return scores;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json metrics_json(const metrics::Metrics& m) {
  return {{"AS", m.as}, {"BS", m.bs}, {"SAS", m.sas}, {"ACS", m.acs}};
}

void print_table_header(std::ostream& out) {
  out << std::left << std::setw(24) << "run" << std::right << std::setw(12) << "AS" << std::setw(12) << "BS"
      << std::setw(8) << "SAS" << std::setw(12) << "ACS" << '\n';
}

void print_table_row(std::ostream& out, const std::string& name, const metrics::Metrics& m) {
  out << std::left << std::setw(24) << name << std::right << std::setw(12) << fixed(m.as) << std::setw(12)
      << fixed(m.bs) << std::setw(8) << m.sas << std::setw(12) << fixed(m.acs) << '\n';
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string config;
  std::string out;
  std::string modes;
  std::string algorithm;
  std::string env;
  int episodes = 0;
  std::string seeds;
  int jobs = 1;
};

struct Job {
  replay::ReplayMode mode;
  std::uint64_t seed;
  rl::RunResult result;
  std::exception_ptr error;
};

json snapshot_json(const rl::EffectSnapshot& s) {
  json j = {{"episode", s.episode + 1},
            {"sequence", s.sequence},
            {"analysed_episodes", s.analysed_episodes},
            {"complete", s.complete},
            {"k_prime", s.k_prime},
            {"weighted_transitions", s.weighted_transitions},
            {"planted_factor", s.planted_factor},
            {"planted_relevant", s.planted_relevant},
            {"warnings", s.warnings}};
  j["effects"] = s.effects_json.empty() ? json::array() : json::parse(s.effects_json);
  return j;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  ExperimentConfig cfg = default_experiment();
  if (!o.config.empty()) cfg = parse_experiment(read_json_file(o.config));
  if (!o.modes.empty()) {
    cfg.modes.clear();
    for (const auto& m : split_list(o.modes)) cfg.modes.push_back(replay::parse_replay_mode(m));
  }
  if (!o.algorithm.empty()) cfg.train.agent.algorithm = rl::parse_algorithm(o.algorithm);
  if (!o.env.empty()) cfg.train.env.kind = o.env;
  if (o.episodes > 0) cfg.train.episodes = o.episodes;
  if (!o.seeds.empty()) {
    cfg.seeds.clear();
    for (const auto& s : split_list(o.seeds)) {
      try {
        cfg.seeds.push_back(std::stoull(s));
      } catch (const std::exception&) {
        fail(Errc::ConfigError, "bad seed '" + s + "'");
      }
    }
  }
  finalize(cfg);
  if (o.jobs < 1) fail(Errc::ConfigError, "--jobs must be >= 1");

  const auto started = std::chrono::steady_clock::now();
  std::vector<Job> jobs;
  for (replay::ReplayMode m : cfg.modes) {
    for (std::uint64_t s : cfg.seeds) jobs.push_back({m, s, {}, nullptr});
  }

  std::atomic<std::size_t> next{0};
  std::mutex print;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      rl::TrainConfig t = cfg.train;
      t.replay.mode = job.mode;
      t.seed = job.seed;
      try {
        job.result = rl::train(t);
        const metrics::Metrics m = metrics::compute_metrics(job.result.scores);
        std::lock_guard lock(print);
        out << "finished " << replay::to_string(job.mode) << " seed " << job.seed << ": AS=" << fixed(m.as)
            << " SAS=" << m.sas << '\n';
      } catch (...) {
        job.error = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(o.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const Job& job : jobs) {
    if (job.error) std::rethrow_exception(job.error);
  }

  const fs::path root(o.out);
  RunManifest manifest;
  manifest.config = to_json(cfg);
  manifest.seeds = cfg.seeds;
  std::vector<metrics::PlotSeries> plot;
  json runs = json::array();
  std::string last_pag;
  for (const Job& job : jobs) {
    const std::string mode(replay::to_string(job.mode));
    const fs::path dir = root / mode / ("seed_" + std::to_string(job.seed));
    rl::TrainConfig t = cfg.train;
    t.replay.mode = job.mode;
    t.seed = job.seed;
    ExperimentConfig single = cfg;
    single.train = t;
    single.modes = {job.mode};
    single.seeds = {job.seed};
    write_file(dir / "scores.csv", scores_csv(job.result.scores));
    json snaps = json::array();
    for (const auto& s : job.result.snapshots) snaps.push_back(snapshot_json(s));
    write_file(dir / "effects.json", snaps.dump(2));
    write_file(dir / "config.json", to_json(single).dump(2));
    manifest.outputs.push_back((dir / "scores.csv").string());
    manifest.outputs.push_back((dir / "effects.json").string());
    manifest.outputs.push_back((dir / "config.json").string());
    for (auto it = job.result.snapshots.rbegin(); it != job.result.snapshots.rend(); ++it) {
      if (!it->pag_dot.empty()) {
        write_file(dir / "pag.dot", it->pag_dot);
        manifest.outputs.push_back((dir / "pag.dot").string());
        last_pag = it->pag_dot;
        break;
      }
    }
    const metrics::Metrics m = metrics::compute_metrics(job.result.scores);
    json r = {{"mode", mode}, {"seed", job.seed}, {"metrics", metrics_json(m)}, {"snapshots", job.result.snapshots.size()}};
    if (!job.result.snapshots.empty()) r["planted_relevance_rate"] = rl::planted_relevance_rate(job.result);
    runs.push_back(r);
    plot.push_back({mode + " seed " + std::to_string(job.seed), job.result.scores});
  }

  json summary;
  summary["runs"] = runs;
  for (replay::ReplayMode m : cfg.modes) {
    std::vector<double> as, bs, sas, acs;
    for (const Job& job : jobs) {
      if (job.mode != m) continue;
      const metrics::Metrics x = metrics::compute_metrics(job.result.scores);
      as.push_back(x.as);
      bs.push_back(x.bs);
      sas.push_back(x.sas);
      acs.push_back(x.acs);
    }
    summary["median_by_mode"][std::string(replay::to_string(m))] = {
        {"AS", metrics::median(as)}, {"BS", metrics::median(bs)}, {"SAS", metrics::median(sas)}, {"ACS", metrics::median(acs)}};
  }
  const bool has_uniform = std::find(cfg.modes.begin(), cfg.modes.end(), replay::ReplayMode::Uniform) != cfg.modes.end();
  if (has_uniform && cfg.seeds.size() >= 10) {
    auto scores_of = [&](replay::ReplayMode m) {
      std::vector<std::vector<double>> v;
      for (const Job& job : jobs) {
        if (job.mode == m) v.push_back(job.result.scores);
      }
      return v;
    };
    for (replay::ReplayMode m : cfg.modes) {
      if (m == replay::ReplayMode::Uniform) continue;
      const auto report = metrics::compare_runs(scores_of(replay::ReplayMode::Uniform), scores_of(m));
      summary["comparisons"][std::string(replay::to_string(m)) + "_vs_uniform"] = json::parse(report.to_json());
    }
  }
  write_file(root / "metrics.json", summary.dump(2));
  write_file(root / "plot.svg", metrics::svg_line_plot(plot));
  write_file(root / "config.json", manifest.config.dump(2));
  if (!last_pag.empty()) write_file(root / "pag.dot", last_pag);
  for (const char* name : {"metrics.json", "plot.svg", "config.json"}) manifest.outputs.push_back((root / name).string());
  if (!last_pag.empty()) manifest.outputs.push_back((root / "pag.dot").string());
  manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_file(root / "manifest.json", manifest.to_json().dump(2));

  print_table_header(out);
  for (const Job& job : jobs) {
    print_table_row(out, std::string(replay::to_string(job.mode)) + " seed " + std::to_string(job.seed),
                    metrics::compute_metrics(job.result.scores));
  }
  return Success;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOptions {
  std::string input;
  std::string out;
  int K = 0;
  int w = 3;
  double beta = 50.0;
  double lambda = 0.11;
  int max_iters = 100;
  std::uint64_t seed = 0;
  bool no_normalize = false;
};

int cmd_segment(const SegmentOptions& o, std::ostream& out) {
  std::ifstream in = open_input(o.input);
  const auto log = series::read_episode_log(in);
  json episodes = json::array();
  for (const auto& ep : series::group_by_episode(log)) {
    series::ActionTimeSeries s = series::build_series(ep);
    if (!o.no_normalize) s = series::znormalize(s);
    ticc::TiccParams p;
    p.w = o.w;
    p.beta = o.beta;
    p.lambda = o.lambda;
    p.max_em_iters = o.max_iters;
    p.seed = o.seed;
    p.K = o.K > 0 ? o.K : ticc::adaptive_k(s.length(), {.w = o.w});
    const ticc::TiccFit fit = ticc::fit_ticc(s, p);
    json segs = json::array();
    for (const auto& r : fit.segmentation.segments) segs.push_back({{"label", r.label}, {"start", r.start}, {"end", r.end}});
    episodes.push_back({{"episode", s.episode_id},
                        {"K", p.K},
                        {"w", p.w},
                        {"labels", fit.segmentation.labels},
                        {"segments", segs},
                        {"objective_trace", fit.objective_trace},
                        {"em_iterations", fit.em_iterations},
                        {"converged", fit.converged},
                        {"warnings", fit.warnings}});
  }
  const std::string text = json{{"episodes", episodes}}.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
  }
  return Success;
}

// ---------------------------------------------------------------------------
// discover

struct DiscoverOptions {
  std::string input;
  std::string occurrences;
  std::string out = ".";
  double alpha = 0.01;
  std::uint64_t seed = 0;
  std::string aggregation = "sum";
};

tscf::OccurrenceMap read_occurrences(const std::string& path, int factors) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("episode,factor,start,end", 0) != 0) {
    fail(Errc::ParseError, path + ": header must be episode,factor,start,end");
  }
  tscf::OccurrenceMap occ;
  occ.set_factor_count(factors);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_list(line);
    if (f.size() != 4) fail(Errc::ParseError, path + ":" + std::to_string(row) + ": expected 4 fields");
    try {
      const int k = std::stoi(f[1]);
      if (k < 0 || k >= factors) fail(Errc::ParseError, path + ":" + std::to_string(row) + ": factor out of range");
      occ.add(std::stoll(f[0]), k, {std::stoll(f[2]), std::stoll(f[3])});
    } catch (const std::logic_error&) {
      fail(Errc::ParseError, path + ":" + std::to_string(row) + ": not an integer");
    }
  }
  return occ;
}

int cmd_discover(const DiscoverOptions& o, std::ostream& out) {
  std::ifstream in = open_input(o.input);
  const auto enc = tscf::read_encoding_csv(in);
  causal::CausalDataset data = causal::CausalDataset::from_encodings(enc);
  tscf::OccurrenceMap occ;
  occ.set_factor_count(data.treatment_count());
  if (!o.occurrences.empty()) occ = read_occurrences(o.occurrences, data.treatment_count());

  causal::GfciOptions g;
  g.alpha = o.alpha;
  g.seed = o.seed;
  const causal::GfciResult found = causal::gfci_lite(data, g);
  std::vector<std::string> warnings = found.warnings;
  const causal::Pag corrected = causal::time_correction(found.pag, occ, &warnings);
  causal::PathAggregation agg = causal::PathAggregation::Sum;
  if (o.aggregation == "product") {
    agg = causal::PathAggregation::Product;
  } else if (o.aggregation != "sum") {
    fail(Errc::ConfigError, "--aggregation must be sum or product");
  }
  const causal::CausalEffectTable effects = causal::path_strengths(corrected, data, agg);
  for (const auto& w : warnings) warn(w);

  const fs::path dir(o.out);
  const std::string dot = causal::to_dot(corrected, data.names);
  write_file(dir / "pag.dot", dot);
  write_file(dir / "raw_pag.dot", causal::to_dot(found.pag, data.names));
  write_file(dir / "effects.json", causal::effects_to_json(effects, data.names) + "\n");
  out << dot;
  return Success;
}

// ---------------------------------------------------------------------------
// replay-sim

struct ReplaySimOptions {
  std::string fixture;
  long long draws = 1'000'000;
  std::size_t batch = 100;
  std::uint64_t seed = 0;
  std::string out;
};

json builtin_fixture() {
  json items = json::array();
  const double c[] = {0.0, 1.0, 0.5, 0.0, 0.25, 0.0, 1.0, 0.0, 0.75, 0.0};
  const double td[] = {0.1, 0.5, 2.0, 0.05, 0.3, 1.5, 0.0, 0.8, 0.2, 1.0};
  for (int i = 0; i < 10; ++i) items.push_back({{"c", c[i]}, {"td", td[i]}});
  return {{"mode", "ciper"}, {"lambda_u", 0.3}, {"epoch", 20}, {"epsilon_m", 100}, {"eta", 1.0}, {"items", items}};
}

int cmd_replay_sim(const ReplaySimOptions& o, std::ostream& out) {
  const json fx = o.fixture.empty() ? builtin_fixture() : read_json_file(o.fixture);
  replay::ReplayConfig rc;
  int epoch = 0;
  std::vector<double> c, td;
  try {
    rc.mode = replay::parse_replay_mode(fx.value("mode", std::string("ciper")));
    rc.lambda_u = fx.value("lambda_u", rc.lambda_u);
    rc.per_alpha = fx.value("per_alpha", rc.per_alpha);
    rc.per_beta0 = fx.value("per_beta0", rc.per_beta0);
    rc.per_epsilon = fx.value("per_epsilon", rc.per_epsilon);
    rc.td_coeff = fx.value("td_coeff", rc.td_coeff);
    rc.causal_coeff = fx.value("causal_coeff", rc.causal_coeff);
    rc.curriculum.epsilon_m = fx.value("epsilon_m", rc.curriculum.epsilon_m);
    rc.curriculum.eta = fx.value("eta", rc.curriculum.eta);
    epoch = fx.value("epoch", 0);
    for (const auto& item : fx.at("items")) {
      c.push_back(item.value("c", 0.0));
      td.push_back(item.value("td", 0.0));
    }
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("fixture: ") + e.what());
  }
  if (c.empty()) fail(Errc::ParseError, "fixture has no items");
  if (o.draws < 1 || o.batch < 1) fail(Errc::ConfigError, "--draws and --batch must be positive");
  rc.capacity = c.size();
  rc.temp_capacity = c.size();
  rc.batch = std::min(o.batch, c.size());

  replay::ReplayBuffer buffer(rc);
  for (std::size_t i = 0; i < c.size(); ++i) {
    series::Transition tr;
    tr.state = Eigen::VectorXd::Zero(1);
    tr.action = Eigen::VectorXd::Zero(1);
    tr.next_state = tr.state;
    tr.episode_id = 0;
    tr.step_index = static_cast<std::int64_t>(i);
    buffer.push(std::move(tr));
  }
  std::vector<std::size_t> slots(c.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  buffer.update_td(slots, td);
  buffer.install_causal_weights(c);
  buffer.set_epoch(epoch);

  std::vector<double> expected(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) expected[i] = buffer.probability(i);
  std::vector<long long> counts(c.size(), 0);
  std::mt19937_64 rng(o.seed);
  long long drawn = 0;
  while (drawn < o.draws) {
    const auto take = static_cast<std::size_t>(std::min<long long>(static_cast<long long>(rc.batch), o.draws - drawn));
    for (std::size_t s : buffer.sample(take, rng).slots) ++counts[s];
    drawn += static_cast<long long>(take);
  }
  // Stratified batches are not independent draws, so the chi-square p-value
  // is only indicative for batch > 1.
  const metrics::GoodnessOfFit gof = metrics::chi_square_gof(counts, expected);
  double max_abs = 0.0, max_rel = 0.0;
  std::vector<double> observed(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    observed[i] = static_cast<double>(counts[i]) / static_cast<double>(drawn);
    max_abs = std::max(max_abs, std::abs(observed[i] - expected[i]));
    if (expected[i] > 0.0) max_rel = std::max(max_rel, std::abs(observed[i] - expected[i]) / expected[i]);
  }
  json report = {{"mode", std::string(replay::to_string(rc.mode))},
                 {"n", c.size()},
                 {"draws", drawn},
                 {"batch", rc.batch},
                 {"mu", buffer.current_mu()},
                 {"expected", expected},
                 {"observed", observed},
                 {"max_abs_error", max_abs},
                 {"max_rel_error", max_rel},
                 {"chi_square", {{"statistic", gof.statistic}, {"df", gof.df}, {"p_value", gof.p_value}}}};
  if (!o.out.empty()) write_file(o.out, report.dump(2) + "\n");
  out << "index  expected   observed\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << std::setw(5) << i << "  " << fixed(expected[i], 6) << "  " << fixed(observed[i], 6) << '\n';
  }
  out << "max relative error " << fixed(max_rel, 6) << ", chi-square " << fixed(gof.statistic, 3) << " (df "
      << gof.df << ", p " << fixed(gof.p_value, 4) << ")\n";
  return Success;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::vector<std::string> scores;
  std::vector<std::string> baseline;
  std::vector<std::string> treatment;
  std::string out;
  int smoothing = 10;
  std::size_t min_seeds = 10;
};

std::string series_name(const std::string& path) {
  const fs::path p(path);
  if (p.stem() == "scores" && p.has_parent_path()) {
    const fs::path parent = p.parent_path();
    if (parent.has_parent_path() && !parent.parent_path().filename().empty()) {
      return parent.parent_path().filename().string() + "/" + parent.filename().string();
    }
    return parent.filename().string();
  }
  return p.stem().string();
}

int cmd_report(const ReportOptions& o, std::ostream& out) {
  if (o.scores.empty() && o.baseline.empty()) fail(Errc::ConfigError, "report needs --scores or --baseline/--treatment");
  json summary;
  std::vector<metrics::PlotSeries> plot;
  print_table_header(out);
  for (const std::string& path : o.scores) {
    const auto scores = read_scores(path);
    const metrics::Metrics m = metrics::compute_metrics(scores);
    const std::string name = series_name(path);
    print_table_row(out, name, m);
    summary["runs"].push_back({{"name", name}, {"path", path}, {"metrics", metrics_json(m)}});
    plot.push_back({name, scores});
  }
  if (!o.baseline.empty() || !o.treatment.empty()) {
    std::vector<std::vector<double>> base, treat;
    for (const auto& p : o.baseline) base.push_back(read_scores(p));
    for (const auto& p : o.treatment) treat.push_back(read_scores(p));
    metrics::CompareOptions co;
    co.smoothing = o.smoothing;
    co.min_seeds = o.min_seeds;
    const metrics::ComparisonReport r = metrics::compare_runs(base, treat, co);
    summary["comparison"] = json::parse(r.to_json());
    out << "\nmetric    baseline   treatment   p(one-sided)\n";
    for (const auto& m : r.metrics) {
      out << std::left << std::setw(8) << m.name << std::right << std::setw(10) << fixed(m.baseline_median)
          << std::setw(12) << fixed(m.treatment_median) << std::setw(15) << fixed(m.test.p_value, 4) << '\n';
    }
    out << std::left << std::setw(8) << "EPS" << std::right << std::setw(10) << fixed(r.baseline_episodes_median)
        << std::setw(12) << fixed(r.treatment_episodes_median) << std::setw(15) << fixed(r.speed_test.p_value, 4)
        << '\n';
  }
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_file(dir / "metrics.json", summary.dump(2) + "\n");
    if (!plot.empty()) write_file(dir / "plot.svg", metrics::svg_line_plot(plot));
  }
  return Success;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal-inference experience replay toolkit", "cier"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Train agents for every replay mode and seed");
  run_cmd->add_option("--config", run.config, "Experiment JSON (defaults when omitted)")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--mode", run.modes, "Comma-separated replay modes: uniform, per, cier, ciper");
  run_cmd->add_option("--algorithm", run.algorithm, "ddpg or td3");
  run_cmd->add_option("--env", run.env, "planted or laneworld");
  run_cmd->add_option("--episodes", run.episodes, "Episodes per run");
  run_cmd->add_option("--seed,--seeds", run.seeds, "Comma-separated seeds");
  run_cmd->add_option("--jobs", run.jobs, "Parallel workers");

  SegmentOptions seg;
  auto* seg_cmd = app.add_subcommand("segment", "Segment each episode of an episode-log CSV with TICC");
  seg_cmd->add_option("--input", seg.input, "Episode-log CSV")->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--out", seg.out, "Labels JSON (stdout when omitted)");
  seg_cmd->add_option("--K", seg.K, "Cluster count (0 picks it from the episode length)");
  seg_cmd->add_option("--w", seg.w, "Window size");
  seg_cmd->add_option("--beta", seg.beta, "Switching penalty");
  seg_cmd->add_option("--lambda", seg.lambda, "Sparsity penalty");
  seg_cmd->add_option("--max-iters", seg.max_iters, "EM iteration cap");
  seg_cmd->add_option("--seed", seg.seed, "Seed");
  seg_cmd->add_flag("--no-normalize", seg.no_normalize, "Skip per-dimension z-normalization");

  DiscoverOptions disc;
  auto* disc_cmd = app.add_subcommand("discover", "Causal discovery on a factor-encoding CSV");
  disc_cmd->add_option("--input", disc.input, "Encoding CSV (episode,U0..,outcome)")->required()->check(CLI::ExistingFile);
  disc_cmd->add_option("--occurrences", disc.occurrences, "Occurrence CSV (episode,factor,start,end)")
      ->check(CLI::ExistingFile);
  disc_cmd->add_option("--out", disc.out, "Output directory for pag.dot, raw_pag.dot, effects.json");
  disc_cmd->add_option("--alpha", disc.alpha, "Independence-test level");
  disc_cmd->add_option("--seed", disc.seed, "Seed for the restarts");
  disc_cmd->add_option("--aggregation", disc.aggregation, "sum or product");

  ReplaySimOptions sim;
  auto* sim_cmd = app.add_subcommand("replay-sim", "Compare sampling frequencies with the replay distribution");
  sim_cmd->add_option("--fixture", sim.fixture, "Fixture JSON (built-in 10-item fixture when omitted)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--draws", sim.draws, "Number of sampled indices");
  sim_cmd->add_option("--batch", sim.batch, "Stratified batch size per sample call");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--out", sim.out, "Report JSON");

  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Metrics table and score plot for score CSVs");
  rep_cmd->add_option("--scores", rep.scores, "Score CSV (episode,score); repeatable")->check(CLI::ExistingFile);
  rep_cmd->add_option("--baseline", rep.baseline, "Baseline score CSVs, one per seed")->check(CLI::ExistingFile);
  rep_cmd->add_option("--treatment", rep.treatment, "Treatment score CSVs, paired with --baseline")
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("--out", rep.out, "Directory for metrics.json and plot.svg");
  rep_cmd->add_option("--smoothing", rep.smoothing, "Trailing-mean window for episodes-to-threshold");
  rep_cmd->add_option("--min-seeds", rep.min_seeds, "Smallest accepted number of paired seeds");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Success;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Success;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'cier --help' for usage\n";
    return Usage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out);
    if (seg_cmd->parsed()) return cmd_segment(seg, out);
    if (disc_cmd->parsed()) return cmd_discover(disc, out);
    if (sim_cmd->parsed()) return cmd_replay_sim(sim, out);
    if (rep_cmd->parsed()) return cmd_report(rep, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return Usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return DataError;
  }
  return Usage;
}

}  // namespace cier::app
