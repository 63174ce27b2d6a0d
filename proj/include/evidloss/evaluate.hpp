#pragma once

#include <optional>
#include <span>
#include <string>

#include "evidloss/metrics.hpp"
#include "evidloss/net.hpp"
#include "evidloss/synth.hpp"

namespace evidloss {

/// OOD score used for the OOD-detection task.
enum class Scorer { kEvidential, kEnergy, kEntropy };

std::string scorer_name(Scorer s);
std::optional<Scorer> parse_scorer(const std::string& name);
/// u_epis for evidential kinds, energy for energy-bounded kinds, softmax
/// entropy for plain CE and focal.
Scorer default_scorer(LossKind kind);

/// ID points feed IoU (class 0 positive), ECE (max-probability confidence,
/// ten bins) and misclassification detection scored by u_alea. ID versus every
/// non-ID point feeds OOD detection. With require_ood set, a set without OOD
/// points is an error.
MetricsReport evaluate(const MlpModel& model, std::span<const LabeledPoint> points, Scorer scorer,
                       bool require_ood = true);

}  // namespace evidloss
