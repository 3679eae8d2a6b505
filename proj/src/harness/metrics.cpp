#include "cmarl/harness/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cmarl/core/errors.hpp"

namespace cmarl::harness {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_number(std::string_view text) {
  double v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    raise(ErrorCode::Io, "bad number in metrics file: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

bool MetricsRow::same_statistics(const MetricsRow& o) const {
  return step == o.step && mean_return == o.mean_return && std == o.std && min == o.min && max == o.max &&
         episodes == o.episodes && success_rate == o.success_rate;
}

MetricsRow summarize(std::int64_t step, std::span<const double> returns) {
  MetricsRow row;
  row.step = step;
  row.episodes = static_cast<int>(returns.size());
  if (returns.empty()) return row;
  double sum = 0;
  for (double r : returns) sum += r;
  row.mean_return = sum / static_cast<double>(returns.size());
  double sq = 0;
  for (double r : returns) sq += (r - row.mean_return) * (r - row.mean_return);
  row.std = std::sqrt(sq / static_cast<double>(returns.size()));
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  row.min = *lo;
  row.max = *hi;
  return row;
}

std::string format_metrics_row(const MetricsRow& r) {
  return std::to_string(r.step) + "," + shortest(r.mean_return) + "," + shortest(r.std) + "," + shortest(r.min) + "," +
         shortest(r.max) + "," + shortest(r.wall_seconds);
}

void write_metrics(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) out << format_metrics_row(r) << '\n';
}

std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) raise(ErrorCode::Io, "metrics file lacks the expected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos; rest.remove_prefix(comma + 1)) {
      cells.push_back(rest.substr(0, comma));
    }
    cells.push_back(rest);
    if (cells.size() != 6) raise(ErrorCode::Io, "metrics line has " + std::to_string(cells.size()) + " fields");
    MetricsRow r;
    r.step = static_cast<std::int64_t>(parse_number(cells[0]));
    r.mean_return = parse_number(cells[1]);
    r.std = parse_number(cells[2]);
    r.min = parse_number(cells[3]);
    r.max = parse_number(cells[4]);
    r.wall_seconds = parse_number(cells[5]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open " + path);
  return read_metrics(in);
}

double best_policy_metric(std::span<const MetricsRow> rows) {
  if (rows.empty()) raise(ErrorCode::EmptyStream, "no evaluation rows");
  double best = rows.front().mean_return;
  for (const MetricsRow& r : rows) best = std::max(best, r.mean_return);
  return best;
}

std::map<std::string, double> aggregate_normalized(
    const std::map<std::string, std::map<std::string, double>>& scores) {
  std::map<std::string, double> sum;
  std::map<std::string, int> count;
  for (const auto& [task, by_algo] : scores) {
    if (by_algo.empty()) continue;
    double lo = by_algo.begin()->second, hi = lo;
    for (const auto& [algo, s] : by_algo) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    for (const auto& [algo, s] : by_algo) {
      sum[algo] += hi > lo ? (s - lo) / (hi - lo) : 1.0;
      ++count[algo];
    }
  }
  std::map<std::string, double> out;
  for (const auto& [algo, s] : sum) out[algo] = s / count[algo];
  return out;
}

}  // namespace cmarl::harness
