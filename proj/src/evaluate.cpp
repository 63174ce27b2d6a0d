#include "evidloss/evaluate.hpp"

#include <algorithm>
#include <memory>

namespace evidloss {

namespace {

// std::vector<bool> is not contiguous, so metrics get a plain bool array.
struct Flags {
  std::unique_ptr<bool[]> data;
  std::size_t n = 0;
  std::span<const bool> span() const { return {data.get(), n}; }
};

Flags to_flags(const std::vector<bool>& v) {
  Flags f{std::make_unique<bool[]>(v.size()), v.size()};
  std::copy(v.begin(), v.end(), f.data.get());
  return f;
}

}  // namespace

std::string scorer_name(Scorer s) {
  switch (s) {
    case Scorer::kEvidential: return "evidential";
    case Scorer::kEnergy: return "energy";
    case Scorer::kEntropy: return "entropy";
  }
  return "?";
}

std::optional<Scorer> parse_scorer(const std::string& name) {
  if (name == "evidential") return Scorer::kEvidential;
  if (name == "energy") return Scorer::kEnergy;
  if (name == "entropy") return Scorer::kEntropy;
  return std::nullopt;
}

Scorer default_scorer(LossKind kind) {
  if (is_evidential(kind)) return Scorer::kEvidential;
  if (kind == LossKind::kEnergyBoundedCe || kind == LossKind::kEnergyBoundedFocal) {
    return Scorer::kEnergy;
  }
  return Scorer::kEntropy;
}

MetricsReport evaluate(const MlpModel& model, std::span<const LabeledPoint> points, Scorer scorer,
                       bool require_ood) {
  if (points.empty()) throw MetricError("evaluate: empty point set");
  MetricsReport r;
  r.scorer = scorer_name(scorer);

  std::vector<double> confidence, mis_score, ood_score;
  std::vector<bool> correct, mis_label, ood_label, pred_pos, true_pos;
  for (const auto& p : points) {
    const Uncertainties u = predict_uncertainties(model, p.x);
    double score = 0.0;
    switch (scorer) {
      case Scorer::kEvidential: score = u.u_epis; break;
      case Scorer::kEnergy: score = u.energy; break;
      case Scorer::kEntropy: score = u.softmax_entropy; break;
    }
    const bool is_id = p.role == PointRole::kInDistribution;
    ood_score.push_back(score);
    ood_label.push_back(!is_id);
    if (!is_id) {
      (p.role == PointRole::kPseudoOod ? r.counts.pseudo_ood : r.counts.true_ood)++;
      continue;
    }
    ++r.counts.id;
    const auto pred = static_cast<int>(
        std::max_element(u.p_bar.begin(), u.p_bar.end()) - u.p_bar.begin());
    const bool ok = pred == p.label;
    confidence.push_back(-u.u_alea);
    correct.push_back(ok);
    mis_score.push_back(u.u_alea);
    mis_label.push_back(!ok);
    pred_pos.push_back(pred == 0);
    true_pos.push_back(p.label == 0);
    if (!ok) ++r.counts.misclassified;
  }
  if (r.counts.id == 0) throw MetricError("evaluate: no in-distribution points");
  if (require_ood && r.counts.pseudo_ood + r.counts.true_ood == 0) {
    throw MetricError("evaluate: OOD detection requested but no OOD points present");
  }

  const auto correct_a = to_flags(correct), mis_a = to_flags(mis_label), ood_a = to_flags(ood_label);
  const auto pp_a = to_flags(pred_pos), tp_a = to_flags(true_pos);

  r.iou = iou(pp_a.span(), tp_a.span());
  r.ece = ece(confidence, correct_a.span(), 10);
  r.accuracy = 1.0 - static_cast<double>(r.counts.misclassified) / static_cast<double>(r.counts.id);
  r.misclassification = detection_metrics(mis_score, mis_a.span());
  r.ood = detection_metrics(ood_score, ood_a.span());
  return r;
}

}  // namespace evidloss
