#include "evidloss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evidloss {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw MetricError(std::string(what) + ": length mismatch");
  if (a == 0) throw MetricError(std::string(what) + ": empty input");
}

struct ClassCounts {
  std::size_t pos = 0, neg = 0;
};

ClassCounts count_classes(std::span<const bool> labels) {
  ClassCounts c;
  for (bool l : labels) (l ? c.pos : c.neg)++;
  return c;
}

// Indices sorted by descending score; stable so ties keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

void require_finite(std::span<const double> scores, const char* what) {
  for (double s : scores) {
    if (std::isnan(s)) throw MetricError(std::string(what) + ": NaN score");
  }
}

}  // namespace

double ece(std::span<const double> confidences, std::span<const bool> correct, int n_bins) {
  require_same_length(confidences.size(), correct.size(), "ece");
  if (n_bins < 1) throw MetricError("ece: n_bins must be >= 1");
  std::vector<double> conf_sum(n_bins, 0.0), acc_sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw MetricError("ece: confidence outside [0, 1]");
    // bin m covers (m/M, (m+1)/M]
    int m = static_cast<int>(std::ceil(c * n_bins)) - 1;
    m = std::clamp(m, 0, n_bins - 1);
    conf_sum[m] += c;
    acc_sum[m] += correct[i] ? 1.0 : 0.0;
    ++count[m];
  }
  const double n = static_cast<double>(confidences.size());
  double total = 0.0;
  for (int m = 0; m < n_bins; ++m) {
    if (count[m] == 0) continue;
    const double k = static_cast<double>(count[m]);
    total += (k / n) * std::abs(acc_sum[m] / k - conf_sum[m] / k);
  }
  return total;
}

double auroc(std::span<const double> scores, std::span<const bool> labels) {
  require_same_length(scores.size(), labels.size(), "auroc");
  require_finite(scores, "auroc");
  const auto cc = count_classes(labels);
  if (cc.pos == 0 || cc.neg == 0) throw MetricError("auroc: need both classes");

  // Rank-sum over tie groups, ascending.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pairs = 0.0;  // doubled count of (pos > neg) + ties
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t pos_here = 0, neg_here = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? pos_here : neg_here)++;
      ++j;
    }
    pairs += 2.0 * static_cast<double>(pos_here) * static_cast<double>(neg_below) +
             static_cast<double>(pos_here) * static_cast<double>(neg_here);
    neg_below += neg_here;
    i = j;
  }
  return pairs / (2.0 * static_cast<double>(cc.pos) * static_cast<double>(cc.neg));
}

double aupr(std::span<const double> scores, std::span<const bool> labels) {
  require_same_length(scores.size(), labels.size(), "aupr");
  require_finite(scores, "aupr");
  const auto cc = count_classes(labels);
  if (cc.pos == 0) throw MetricError("aupr: no positives");
  const auto idx = descending_order(scores);
  std::size_t tp = 0, fp = 0;
  double prev_recall = 0.0, area = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp)++;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(cc.pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double fpr_at_95_tpr(std::span<const double> scores, std::span<const bool> labels) {
  require_same_length(scores.size(), labels.size(), "fpr95");
  require_finite(scores, "fpr95");
  const auto cc = count_classes(labels);
  if (cc.pos == 0 || cc.neg == 0) throw MetricError("fpr95: need both classes");
  const auto idx = descending_order(scores);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp)++;
      ++j;
    }
    // integer form of tp / pos >= 0.95
    if (100 * tp >= 95 * cc.pos) return static_cast<double>(fp) / static_cast<double>(cc.neg);
    i = j;
  }
  return 1.0;
}

double iou(std::span<const bool> predicted_positive, std::span<const bool> true_positive) {
  if (predicted_positive.size() != true_positive.size()) throw MetricError("iou: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted_positive.size(); ++i) {
    if (predicted_positive[i] && true_positive[i]) ++tp;
    else if (predicted_positive[i]) ++fp;
    else if (true_positive[i]) ++fn;
  }
  const std::size_t uni = tp + fp + fn;
  return uni == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(uni);
}

std::optional<DetectionMetrics> detection_metrics(std::span<const double> scores,
                                                  std::span<const bool> labels) {
  const auto cc = count_classes(labels);
  if (cc.pos == 0 || cc.neg == 0) return std::nullopt;
  return DetectionMetrics{auroc(scores, labels), aupr(scores, labels), fpr_at_95_tpr(scores, labels)};
}

nlohmann::ordered_json MetricsReport::to_json() const {
  auto opt = [](const std::optional<DetectionMetrics>& d, double DetectionMetrics::*field) {
    return d ? nlohmann::ordered_json(d.value().*field) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["scorer"] = scorer;
  j["iou"] = iou;
  j["ece"] = ece;
  j["accuracy"] = accuracy;
  j["mis_auroc"] = opt(misclassification, &DetectionMetrics::auroc);
  j["mis_aupr"] = opt(misclassification, &DetectionMetrics::aupr);
  j["mis_fpr95"] = opt(misclassification, &DetectionMetrics::fpr95);
  j["ood_auroc"] = opt(ood, &DetectionMetrics::auroc);
  j["ood_aupr"] = opt(ood, &DetectionMetrics::aupr);
  j["ood_fpr95"] = opt(ood, &DetectionMetrics::fpr95);
  j["counts"] = {{"id", counts.id},
                 {"pseudo_ood", counts.pseudo_ood},
                 {"true_ood", counts.true_ood},
                 {"misclassified", counts.misclassified}};
  return j;
}

}  // namespace evidloss
