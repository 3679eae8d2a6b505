#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cmarl::harness {

/// Aggregate of one evaluation checkpoint. Only the first six fields are
/// written to the metrics file.
struct MetricsRow {
  std::int64_t step = 0;
  double mean_return = 0.0;
  double std = 0.0;  // population standard deviation over the episodes
  double min = 0.0;
  double max = 0.0;
  double wall_seconds = 0.0;
  int episodes = 0;
  double success_rate = 0.0;  // fraction of episodes ending in a terminal event

  /// Equality on everything except wall-clock time.
  bool same_statistics(const MetricsRow& other) const;
};

MetricsRow summarize(std::int64_t step, std::span<const double> returns);

inline constexpr const char* kMetricsHeader = "step,mean_return,std,min,max,wall_seconds";

/// One CSV line (no newline); floats use the shortest round-trip form.
std::string format_metrics_row(const MetricsRow& row);
void write_metrics(std::ostream& out, std::span<const MetricsRow> rows);
/// Parses a metrics file; raises Io on a bad header or malformed line.
std::vector<MetricsRow> read_metrics(std::istream& in);
std::vector<MetricsRow> read_metrics_file(const std::string& path);

/// Best evaluation mean over the stream; raises EmptyStream on no rows.
double best_policy_metric(std::span<const MetricsRow> rows);

/// Per task, min-max normalise each algorithm's score across algorithms
/// (all-equal tasks map every algorithm to 1.0), then average over the
/// tasks each algorithm appears in. `scores[task][algorithm]`.
std::map<std::string, double> aggregate_normalized(
    const std::map<std::string, std::map<std::string, double>>& scores);

}  // namespace cmarl::harness
