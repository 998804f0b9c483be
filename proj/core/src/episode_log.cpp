#include "cier/episode_log.hpp"

#include "cier/error.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cier::series {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::ParseError, "row " + std::to_string(row) + ": not a number: '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, std::size_t row) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(Errc::ParseError, "row " + std::to_string(row) + ": not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace

void write_episode_log(std::ostream& out, const std::vector<Transition>& log) {
  const Eigen::Index d = log.empty() ? 0 : log.front().action.size();
  const Eigen::Index m = log.empty() ? 0 : log.front().state.size();
  out << "episode,step,reward,done";
  for (Eigen::Index j = 0; j < d; ++j) out << ",a" << j;
  for (Eigen::Index j = 0; j < m; ++j) out << ",s" << j;
  out << '\n';
  out.precision(17);
  for (const Transition& tr : log) {
    if (tr.action.size() != d || tr.state.size() != m) {
      fail(Errc::DimensionMismatch, "episode log rows must share action/state dimensions");
    }
    out << tr.episode_id << ',' << tr.step_index << ',' << tr.reward << ',' << (tr.done ? 1 : 0);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << tr.action[j];
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << tr.state[j];
    out << '\n';
  }
}

std::vector<Transition> read_episode_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "episode log is empty");
  const auto header = split_csv(line);
  if (header.size() < 5 || header[0] != "episode" || header[1] != "step" || header[2] != "reward" ||
      header[3] != "done") {
    fail(Errc::ParseError, "episode log header must start with episode,step,reward,done");
  }
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  for (std::size_t c = 4; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "a" + std::to_string(d) && m == 0) {
      ++d;
    } else if (h == "s" + std::to_string(m)) {
      ++m;
    } else {
      fail(Errc::ParseError, "unexpected column '" + h + "'");
    }
  }
  if (d == 0) fail(Errc::ParseError, "episode log has no action columns");

  std::vector<Transition> log;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      fail(Errc::ParseError, "row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                                 " fields, expected " + std::to_string(header.size()));
    }
    Transition tr;
    tr.episode_id = parse_int(f[0], row);
    tr.step_index = parse_int(f[1], row);
    tr.reward = parse_double(f[2], row);
    const auto done = parse_int(f[3], row);
    if (done != 0 && done != 1) fail(Errc::ParseError, "row " + std::to_string(row) + ": done must be 0 or 1");
    tr.done = done == 1;
    tr.action.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) tr.action[j] = parse_double(f[4 + j], row);
    tr.state.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) tr.state[j] = parse_double(f[4 + d + j], row);
    log.push_back(std::move(tr));
  }

  for (std::size_t k = 0; k < log.size(); ++k) {
    const bool has_next = k + 1 < log.size() && log[k + 1].episode_id == log[k].episode_id;
    log[k].next_state = has_next ? log[k + 1].state : log[k].state;
  }
  return log;
}

}  // namespace cier::series
