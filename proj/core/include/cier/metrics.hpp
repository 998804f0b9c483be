#pragma once

#include <span>
#include <string>
#include <vector>

namespace cier::metrics {

/// Training-curve summary of one run.
struct Metrics {
  double as = 0.0;   // average score
  double bs = 0.0;   // best score
  int sas = 1;       // first (1-based) episode whose score reaches AS
  double acs = 0.0;  // mean of the running cumulative score
};

/// Throws EmptyScores.
Metrics compute_metrics(std::span<const double> scores);

/// First 1-based episode whose trailing mean over the last `window` scores
/// reaches `threshold`, or scores.size() + 1 if none. Only full windows are
/// considered (the whole run when it is shorter than the window).
int episodes_to_threshold(std::span<const double> scores, double threshold, int window = 1);

struct WilcoxonResult {
  double w_plus = 0.0;   // rank sum of positive differences
  double w_minus = 0.0;  // rank sum of negative differences
  int n = 0;             // non-zero differences
  double p_value = 1.0;  // one-sided, H1: differences tend to be positive
};

/// Exact one-sided signed-rank test. Zero differences are dropped, tied
/// magnitudes share the average rank, and the null distribution of W+ is
/// enumerated exactly (ties included). All-zero input gives p = 1.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences);

double median(std::vector<double> values);

struct GoodnessOfFit {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Pearson chi-square test of observed counts against expected
/// probabilities. Categories with zero expected probability must have zero
/// count. Throws InvalidParams.
GoodnessOfFit chi_square_gof(std::span<const long long> observed, std::span<const double> expected);

struct CompareOptions {
  /// Trailing-mean window for episodes-to-threshold.
  int smoothing = 10;
  std::size_t min_seeds = 10;
};

struct MetricComparison {
  std::string name;
  double baseline_median = 0.0;
  double treatment_median = 0.0;
  /// Treatment greater than baseline, paired by seed.
  WilcoxonResult test;
};

struct ComparisonReport {
  std::size_t seeds = 0;
  std::vector<MetricComparison> metrics;  // AS, BS, SAS, ACS
  /// Per seed: the baseline's AS is the threshold both runs must reach.
  std::vector<double> thresholds;
  std::vector<int> baseline_episodes;
  std::vector<int> treatment_episodes;
  double baseline_episodes_median = 0.0;
  double treatment_episodes_median = 0.0;
  /// Treatment reaches the threshold in fewer episodes.
  WilcoxonResult speed_test;

  std::string to_json() const;
};

/// Paired comparison of equally many seeded runs. Throws SeedMismatch when
/// the counts differ or fall below options.min_seeds, EmptyScores on an
/// empty run.
ComparisonReport compare_runs(const std::vector<std::vector<double>>& baseline,
                              const std::vector<std::vector<double>>& treatment, const CompareOptions& options = {});

// ---------------------------------------------------------------------------

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

struct PlotOptions {
  int width = 640;
  int height = 400;
  std::string title = "score per episode";
};

/// Score-versus-episode line chart: one <polyline> per series, axes drawn
/// with <line> elements.
std::string svg_line_plot(std::span<const PlotSeries> series, const PlotOptions& options = {});

}  // namespace cier::metrics
