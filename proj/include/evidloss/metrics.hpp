#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace evidloss {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Expected calibration error with equal-width bins on (0, 1], right-closed;
/// a confidence of exactly 0 falls in the first bin.
double ece(std::span<const double> confidences, std::span<const bool> correct, int n_bins = 10);

/// P(score_pos > score_neg) with ties counted 1/2.
double auroc(std::span<const double> scores, std::span<const bool> labels);

/// Average precision: sum over distinct thresholds of (R_k - R_{k-1}) P_k.
double aupr(std::span<const double> scores, std::span<const bool> labels);

/// False-positive rate at the first threshold (high to low) reaching TPR >= 0.95.
double fpr_at_95_tpr(std::span<const double> scores, std::span<const bool> labels);

/// TP / (TP + FP + FN), 1 for an empty union.
double iou(std::span<const bool> predicted_positive, std::span<const bool> true_positive);

struct DetectionMetrics {
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr95 = 0.0;
};

/// Null when the task is undefined (e.g. no misclassified points).
std::optional<DetectionMetrics> detection_metrics(std::span<const double> scores,
                                                  std::span<const bool> labels);

struct RoleCounts {
  std::size_t id = 0;
  std::size_t pseudo_ood = 0;
  std::size_t true_ood = 0;
  std::size_t misclassified = 0;
};

struct MetricsReport {
  std::string scorer;
  double iou = 0.0;
  double ece = 0.0;
  double accuracy = 0.0;
  std::optional<DetectionMetrics> misclassification;
  std::optional<DetectionMetrics> ood;
  RoleCounts counts;

  nlohmann::ordered_json to_json() const;
};

}  // namespace evidloss
