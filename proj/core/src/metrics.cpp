#include "cier/metrics.hpp"

#include "cier/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace cier::metrics {

Metrics compute_metrics(std::span<const double> scores) {
  if (scores.empty()) fail(Errc::EmptyScores, "no scores to summarize");
  const double n = static_cast<double>(scores.size());
  Metrics m;
  double sum = 0.0;
  double cumulative = 0.0;
  m.bs = scores.front();
  for (double s : scores) {
    sum += s;
    cumulative += sum;
    m.bs = std::max(m.bs, s);
  }
  m.as = sum / n;
  m.acs = cumulative / n;
  // Some score is always >= the mean; the fallback only guards round-off.
  m.sas = static_cast<int>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= m.as) {
      m.sas = static_cast<int>(i) + 1;
      break;
    }
  }
  return m;
}

int episodes_to_threshold(std::span<const double> scores, double threshold, int window) {
  if (window < 1) fail(Errc::InvalidParams, "smoothing window must be >= 1");
  const auto w = static_cast<std::size_t>(window);
  // Partial windows at the start are skipped so that one lucky early episode
  // cannot count as reaching the threshold.
  const std::size_t first = std::min(w, scores.size());
  double running = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    running += scores[i];
    if (i >= w) running -= scores[i - w];
    if (i + 1 < first) continue;
    const double count = static_cast<double>(std::min(i + 1, w));
    if (running / count >= threshold) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(scores.size()) + 1;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(Errc::EmptyScores, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

MetricComparison compare_metric(std::string name, const std::vector<double>& base, const std::vector<double>& treat,
                                bool lower_is_better) {
  MetricComparison c;
  c.name = std::move(name);
  c.baseline_median = median(base);
  c.treatment_median = median(treat);
  std::vector<double> diff(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) diff[i] = lower_is_better ? base[i] - treat[i] : treat[i] - base[i];
  c.test = wilcoxon_signed_rank(diff);
  return c;
}

nlohmann::json to_json(const WilcoxonResult& w) {
  return {{"w_plus", w.w_plus}, {"w_minus", w.w_minus}, {"n", w.n}, {"p_value", w.p_value}};
}

}  // namespace

ComparisonReport compare_runs(const std::vector<std::vector<double>>& baseline,
                              const std::vector<std::vector<double>>& treatment, const CompareOptions& options) {
  if (baseline.size() != treatment.size()) {
    fail(Errc::SeedMismatch, std::to_string(baseline.size()) + " baseline runs vs " +
                                 std::to_string(treatment.size()) + " treatment runs");
  }
  if (baseline.size() < options.min_seeds) {
    fail(Errc::SeedMismatch, "need at least " + std::to_string(options.min_seeds) + " paired seeds, got " +
                                 std::to_string(baseline.size()));
  }
  ComparisonReport r;
  r.seeds = baseline.size();
  std::vector<Metrics> mb, mt;
  for (std::size_t i = 0; i < r.seeds; ++i) {
    mb.push_back(compute_metrics(baseline[i]));
    mt.push_back(compute_metrics(treatment[i]));
    r.thresholds.push_back(mb.back().as);
    r.baseline_episodes.push_back(episodes_to_threshold(baseline[i], mb.back().as, options.smoothing));
    r.treatment_episodes.push_back(episodes_to_threshold(treatment[i], mb.back().as, options.smoothing));
  }
  auto field = [](const std::vector<Metrics>& ms, auto get) {
    std::vector<double> v;
    for (const Metrics& m : ms) v.push_back(get(m));
    return v;
  };
  r.metrics.push_back(compare_metric("AS", field(mb, [](const Metrics& m) { return m.as; }),
                                     field(mt, [](const Metrics& m) { return m.as; }), false));
  r.metrics.push_back(compare_metric("BS", field(mb, [](const Metrics& m) { return m.bs; }),
                                     field(mt, [](const Metrics& m) { return m.bs; }), false));
  r.metrics.push_back(compare_metric("SAS", field(mb, [](const Metrics& m) { return double(m.sas); }),
                                     field(mt, [](const Metrics& m) { return double(m.sas); }), true));
  r.metrics.push_back(compare_metric("ACS", field(mb, [](const Metrics& m) { return m.acs; }),
                                     field(mt, [](const Metrics& m) { return m.acs; }), false));
  const std::vector<double> eb(r.baseline_episodes.begin(), r.baseline_episodes.end());
  const std::vector<double> et(r.treatment_episodes.begin(), r.treatment_episodes.end());
  r.baseline_episodes_median = median(eb);
  r.treatment_episodes_median = median(et);
  std::vector<double> diff(eb.size());
  for (std::size_t i = 0; i < eb.size(); ++i) diff[i] = eb[i] - et[i];
  r.speed_test = wilcoxon_signed_rank(diff);
  return r;
}

std::string ComparisonReport::to_json() const {
  nlohmann::json j;
  j["seeds"] = seeds;
  for (const MetricComparison& m : metrics) {
    j["metrics"][m.name] = {{"baseline_median", m.baseline_median},
                            {"treatment_median", m.treatment_median},
                            {"wilcoxon", metrics::to_json(m.test)}};
  }
  j["episodes_to_threshold"] = {{"thresholds", thresholds},
                                {"baseline", baseline_episodes},
                                {"treatment", treatment_episodes},
                                {"baseline_median", baseline_episodes_median},
                                {"treatment_median", treatment_episodes_median},
                                {"wilcoxon", metrics::to_json(speed_test)}};
  return j.dump(2);
}

}  // namespace cier::metrics
