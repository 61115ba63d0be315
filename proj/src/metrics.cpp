#include "congfu/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "congfu/errors.h"

namespace congfu::metrics {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
  if (scores.size() != labels.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError(std::string(what) + ": labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw ValidationError(std::string(what) + ": non-finite score");
  }
}

// Indices sorted by ascending score (stable).
std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  return idx;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "auroc");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const auto neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError("auroc is undefined with " + std::to_string(pos) + " positives and " +
                               std::to_string(neg) + " negatives");
  }
  // Mann-Whitney U with mid-ranks for ties.
  const auto idx = order_by_score(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid_rank = 0.5 * double(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) rank_sum += mid_rank;
    i = j;
  }
  const double u = rank_sum - double(pos) * double(pos + 1) / 2.0;
  return u / (double(pos) * double(neg));
}

double aucpr(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "aucpr");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0) throw UndefinedMetricError("aucpr is undefined without positive labels");
  auto idx = order_by_score(scores);
  std::reverse(idx.begin(), idx.end());
  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i, group_tp = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) group_tp += labels[idx[j++]] == 1;
    tp += group_tp;
    seen = j;
    if (group_tp) ap += double(group_tp) / double(pos) * (double(tp) / double(seen));
    i = j;
  }
  return ap;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ContractError("mean_std of an empty list");
  MeanStd m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / double(values.size() - 1));
  }
  return m;
}

std::string format_mean_std(const MeanStd& m, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", digits, m.mean, digits, m.std);
  return buf;
}

std::string format_row(const MetricRow& row) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f", row.auroc, row.aucpr);
  return row.dataset + ',' + row.setup + ',' + row.fold + ',' + buf;
}

}  // namespace congfu::metrics
