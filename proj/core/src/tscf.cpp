#include "cier/tscf.hpp"

#include "cier/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace cier::tscf {

double dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const DtwOptions& options) {
  if (a.cols() != b.cols()) {
    fail(Errc::DimensionMismatch, "dtw frames of dimension " + std::to_string(a.cols()) + " and " +
                                      std::to_string(b.cols()));
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  if (n == 0 || m == 0) fail(Errc::EmptyEpisode, "dtw of an empty subsequence");

  Eigen::Index band = std::max(n, m);
  if (options.radius) band = std::max(*options.radius, n > m ? n - m : m - n);

  constexpr double inf = std::numeric_limits<double>::infinity();
  // Two rolling rows over j.
  std::vector<double> prev(static_cast<std::size_t>(m + 1), inf);
  std::vector<double> cur(static_cast<std::size_t>(m + 1), inf);
  prev[0] = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    const Eigen::Index lo = std::max<Eigen::Index>(1, i - band);
    const Eigen::Index hi = std::min<Eigen::Index>(m, i + band);
    for (Eigen::Index j = lo; j <= hi; ++j) {
      const double c = (a.row(i - 1) - b.row(j - 1)).norm();
      const auto uj = static_cast<std::size_t>(j);
      cur[uj] = c + std::min({prev[uj - 1], prev[uj], cur[uj - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(m)];
}

double dtw(const Subsequence& a, const Subsequence& b, const DtwOptions& options) {
  return dtw(a.values, b.values, options);
}

std::vector<Subsequence> extract_segments(const series::ActionTimeSeries& series,
                                          const ticc::Segmentation& segmentation, Eigen::Index min_length) {
  const Eigen::Index n = series.length();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
  for (const ticc::LabelRun& run : segmentation.segments) spans.emplace_back(run.start, run.end);
  if (spans.empty()) spans.emplace_back(0, n - 1);
  spans.back().second = n - 1;

  // Merge short spans forward; a short tail merges backward.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> merged;
  Eigen::Index pending_start = -1;
  for (auto [s, e] : spans) {
    if (pending_start >= 0) s = pending_start;
    if (e - s + 1 < min_length) {
      pending_start = s;
      continue;
    }
    pending_start = -1;
    merged.emplace_back(s, e);
  }
  if (pending_start >= 0) {
    if (merged.empty()) {
      merged.emplace_back(pending_start, n - 1);
    } else {
      merged.back().second = n - 1;
    }
  }

  std::vector<Subsequence> out;
  out.reserve(merged.size());
  for (auto [s, e] : merged) out.push_back(series::slice(series, s, e));
  return out;
}

TscfDictionary cluster_medoids(const Eigen::MatrixXd& D, std::span<const Eigen::Index> lengths, int k_prime,
                               std::uint64_t seed, int max_iters) {
  const auto M = static_cast<std::size_t>(D.rows());
  if (k_prime < 1) fail(Errc::InvalidParams, "K' must be >= 1");
  if (M < static_cast<std::size_t>(k_prime)) {
    fail(Errc::ReduceKPrime, std::to_string(M) + " segments cannot form " + std::to_string(k_prime) + " factors");
  }
  const auto K = static_cast<std::size_t>(k_prime);

  // Farthest-point seeding from a seeded first pick.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> medoids;
  std::vector<bool> chosen(M, false);
  medoids.push_back(std::uniform_int_distribution<std::size_t>(0, M - 1)(rng));
  chosen[medoids[0]] = true;
  std::vector<double> nearest(M);
  for (std::size_t i = 0; i < M; ++i) nearest[i] = D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[0]));
  while (medoids.size() < K) {
    std::size_t pick = M;
    for (std::size_t i = 0; i < M; ++i) {
      if (chosen[i]) continue;
      if (pick == M || nearest[i] > nearest[pick]) pick = i;
    }
    medoids.push_back(pick);
    chosen[pick] = true;
    for (std::size_t i = 0; i < M; ++i) {
      nearest[i] = std::min(nearest[i], D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pick)));
    }
  }

  TscfDictionary dict;
  std::vector<int> assign(M, 0);
  auto dist = [&](std::size_t i, std::size_t j) { return D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

  auto assign_all = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      int best = -1;
      for (std::size_t k = 0; k < K; ++k) {
        if (medoids[k] == i) {
          best = static_cast<int>(k);
          break;
        }
      }
      if (best < 0) {
        best = 0;
        for (std::size_t k = 1; k < K; ++k) {
          if (dist(i, medoids[k]) < dist(i, medoids[static_cast<std::size_t>(best)])) best = static_cast<int>(k);
        }
      }
      assign[i] = best;
      total += dist(i, medoids[static_cast<std::size_t>(best)]);
    }
    return total;
  };

  for (int it = 0; it < max_iters; ++it) {
    dict.iterations = it + 1;
    dict.cost_trace.push_back(assign_all());
    bool changed = false;
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double best_sum = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        if (assign[j] == static_cast<int>(k)) best_sum += dist(medoids[k], j);
      }
      for (std::size_t c = 0; c < M; ++c) {
        if (assign[c] != static_cast<int>(k) || c == medoids[k]) continue;
        double sum = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          if (assign[j] == static_cast<int>(k)) sum += dist(c, j);
        }
        if (sum < best_sum) {
          best_sum = sum;
          medoids[k] = c;
          changed = true;
        }
      }
      total += best_sum;
    }
    dict.cost_trace.push_back(total);
    if (!changed) break;
  }
  dict.total_cost = assign_all();

  dict.assignment = assign;
  dict.factors.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    dict.factors[k].id = static_cast<int>(k);
    dict.factors[k].medoid = medoids[k];
  }
  for (std::size_t i = 0; i < M; ++i) dict.factors[static_cast<std::size_t>(assign[i])].members.push_back(i);
  for (Tscf& f : dict.factors) {
    double len = 0.0;
    for (std::size_t i : f.members) len += static_cast<double>(lengths[i]);
    f.mean_length = len / static_cast<double>(f.members.size());
  }
  return dict;
}

TscfDictionary cluster_factors(std::span<const Subsequence> segments, int k_prime, std::uint64_t seed,
                               const ClusterOptions& options) {
  const std::size_t M = segments.size();
  if (k_prime < 1) fail(Errc::InvalidParams, "K' must be >= 1");
  if (M < static_cast<std::size_t>(k_prime)) {
    fail(Errc::ReduceKPrime, std::to_string(M) + " segments cannot form " + std::to_string(k_prime) + " factors");
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  std::vector<Eigen::Index> lengths(M);
  for (std::size_t i = 0; i < M; ++i) {
    lengths[i] = segments[i].values.rows();
    for (std::size_t j = i + 1; j < M; ++j) {
      const double v = dtw(segments[i], segments[j], options.dtw);
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      D(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return cluster_medoids(D, lengths, k_prime, seed, options.max_iters);
}

int choose_k_prime(std::span<const int> per_episode_k) {
  if (per_episode_k.empty()) fail(Errc::InvalidParams, "choose_k_prime needs at least one K");
  // Exact half-up rounding of sum / n in integers.
  long long sum = 0;
  for (int k : per_episode_k) sum += k;
  const auto n = static_cast<long long>(per_episode_k.size());
  const long long rounded = (2 * sum + n) / (2 * n);
  return static_cast<int>(std::max<long long>(1, rounded));
}

void OccurrenceMap::add(EpisodeId episode, int factor, Interval interval) {
  map_[{episode, factor}].push_back(interval);
  factor_count_ = std::max(factor_count_, factor + 1);
}

const std::vector<Interval>& OccurrenceMap::intervals(EpisodeId episode, int factor) const {
  static const std::vector<Interval> empty;
  auto it = map_.find({episode, factor});
  return it == map_.end() ? empty : it->second;
}

std::optional<Eigen::Index> OccurrenceMap::first_occurrence(EpisodeId episode, int factor) const {
  const auto& iv = intervals(episode, factor);
  if (iv.empty()) return std::nullopt;
  Eigen::Index first = iv.front().start;
  for (const Interval& i : iv) first = std::min(first, i.start);
  return first;
}

bool OccurrenceMap::contains(EpisodeId episode, int factor) const { return !intervals(episode, factor).empty(); }

std::vector<EpisodeId> OccurrenceMap::episodes() const {
  std::vector<EpisodeId> out;
  for (const auto& [key, _] : map_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

Encoding encode_episodes(const TscfDictionary& dictionary, std::span<const Subsequence> segments,
                         std::span<const EpisodeOutcome> outcomes) {
  const int K = dictionary.k_prime();
  if (dictionary.assignment.size() != segments.size()) {
    fail(Errc::InternalInconsistency, "dictionary covers " + std::to_string(dictionary.assignment.size()) +
                                          " segments, corpus has " + std::to_string(segments.size()));
  }
  Encoding enc;
  enc.occurrences.set_factor_count(K);
  std::map<EpisodeId, std::size_t> row;
  for (const EpisodeOutcome& o : outcomes) {
    row.emplace(o.episode_id, enc.episodes.size());
    enc.episodes.push_back({o.episode_id, std::vector<std::uint8_t>(static_cast<std::size_t>(K), 0), o.outcome});
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const int k = dictionary.assignment[i];
    if (k < 0 || k >= K) fail(Errc::InternalInconsistency, "segment " + std::to_string(i) + " has no factor");
    const Subsequence& s = segments[i];
    auto it = row.find(s.episode_id);
    if (it == row.end()) {
      fail(Errc::InternalInconsistency, "segment " + std::to_string(i) + " belongs to unknown episode " +
                                            std::to_string(s.episode_id));
    }
    enc.episodes[it->second].presence[static_cast<std::size_t>(k)] = 1;
    enc.occurrences.add(s.episode_id, k, {s.start, s.end});
  }
  return enc;
}

std::string dictionary_to_json(const TscfDictionary& dictionary, std::span<const Subsequence> segments) {
  nlohmann::json j;
  j["k_prime"] = dictionary.k_prime();
  j["total_cost"] = dictionary.total_cost;
  auto& factors = j["factors"] = nlohmann::json::array();
  for (const Tscf& f : dictionary.factors) {
    const Subsequence& med = segments[f.medoid];
    std::vector<std::vector<double>> frames;
    for (Eigen::Index r = 0; r < med.values.rows(); ++r) {
      frames.emplace_back(static_cast<std::size_t>(med.values.cols()));
      for (Eigen::Index c = 0; c < med.values.cols(); ++c) frames.back()[static_cast<std::size_t>(c)] = med.values(r, c);
    }
    factors.push_back({{"id", f.id},
                       {"member_count", f.members.size()},
                       {"mean_length", f.mean_length},
                       {"medoid", {{"episode", med.episode_id}, {"start", med.start}, {"end", med.end}, {"frames", frames}}}});
  }
  return j.dump(2);
}

void write_encoding_csv(std::ostream& out, std::span<const EpisodeEncoding> encodings) {
  const std::size_t K = encodings.empty() ? 0 : encodings.front().presence.size();
  out << "episode";
  for (std::size_t k = 0; k < K; ++k) out << ",U" << k;
  out << ",outcome\n";
  out.precision(17);
  for (const EpisodeEncoding& e : encodings) {
    if (e.presence.size() != K) fail(Errc::DimensionMismatch, "encodings disagree on K'");
    out << e.episode_id;
    for (auto u : e.presence) out << ',' << static_cast<int>(u);
    out << ',' << e.outcome << '\n';
  }
}

std::vector<EpisodeEncoding> read_encoding_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "encoding CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  if (header.size() < 2 || header.front() != "episode" || header.back() != "outcome") {
    fail(Errc::ParseError, "encoding CSV header must be episode,U0..,outcome");
  }
  const std::size_t K = header.size() - 2;
  for (std::size_t k = 0; k < K; ++k) {
    if (header[k + 1] != "U" + std::to_string(k)) fail(Errc::ParseError, "unexpected column " + header[k + 1]);
  }
  std::vector<EpisodeEncoding> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != header.size()) fail(Errc::ParseError, "row " + std::to_string(row) + " has the wrong width");
    EpisodeEncoding e;
    try {
      e.episode_id = std::stoll(f[0]);
      for (std::size_t k = 0; k < K; ++k) {
        const int u = std::stoi(f[k + 1]);
        if (u != 0 && u != 1) throw std::invalid_argument("binary");
        e.presence.push_back(static_cast<std::uint8_t>(u));
      }
      e.outcome = std::stod(f.back());
    } catch (const std::exception&) {
      fail(Errc::ParseError, "row " + std::to_string(row) + " is malformed");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace cier::tscf
