#pragma once

// Rank-based metrics for binary classification, computed in double.

#include <span>
#include <string>
#include <vector>

namespace congfu::metrics {

/// P(score of a random positive > score of a random negative), ties count
/// one half. UndefinedMetricError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Average precision: sum_k (R_k - R_{k-1}) P_k over descending score
/// thresholds, tied scores forming one threshold. UndefinedMetricError
/// without positives.
double aucpr(std::span<const double> scores, std::span<const int> labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for n = 1
};

MeanStd mean_std(std::span<const double> values);

/// "0.976 ± 0.001"
std::string format_mean_std(const MeanStd& m, int digits = 3);

struct MetricRow {
  std::string dataset;
  std::string setup;
  std::string fold;  // fold index, or "mean±std" for aggregate rows
  double auroc = 0.0;
  double aucpr = 0.0;
};

inline constexpr const char* kMetricsHeader = "dataset,setup,fold,auroc,aucpr";
std::string format_row(const MetricRow& row);

}  // namespace congfu::metrics
