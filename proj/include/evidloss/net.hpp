#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evidloss/dirichlet.hpp"
#include "evidloss/losses.hpp"
#include "evidloss/synth.hpp"

namespace evidloss {

enum class LossKind {
  kUceEnt,
  kUfce,
  kUfceEusEr,
  kUceEusEr,
  kCrossEntropy,
  kFocal,
  kEnergyBoundedCe,
  kEnergyBoundedFocal,
};

std::string loss_kind_name(LossKind kind);
std::optional<LossKind> parse_loss_kind(const std::string& name);
/// Evidential kinds train the alpha head; the rest train softmax over logits.
bool is_evidential(LossKind kind);
/// Kinds whose objective has a term on pseudo-OOD samples (ER or energy bound).
bool uses_pseudo_ood(LossKind kind);

enum class HeadKind { kEvidential, kSoftmax };
HeadKind head_for(LossKind kind);

class ForwardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 2 -> H -> H -> C perceptron with rectified hidden layers. Parameters live
/// in one flat vector; layer l stores its weights row-major (out x in)
/// followed by its bias.
struct MlpModel {
  std::vector<std::size_t> widths;
  std::vector<double> params;
  HeadKind head = HeadKind::kEvidential;

  static MlpModel zeros(std::size_t classes, std::size_t hidden, HeadKind head);
  /// Weights and biases uniform on +-1/sqrt(fan_in); an evidential head's
  /// output bias starts at 1.
  static MlpModel initialized(std::size_t classes, std::size_t hidden, HeadKind head,
                              std::uint64_t seed);

  std::size_t layer_count() const { return widths.size() - 1; }
  std::size_t classes() const { return widths.back(); }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;

  nlohmann::ordered_json to_json() const;
  /// Throws std::runtime_error on a version mismatch or malformed content.
  static MlpModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static MlpModel load(const std::filesystem::path& path);

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

inline constexpr const char* kModelVersion = "evidloss-model-v1";

struct ForwardResult {
  std::vector<double> logits;
  DirichletParams alpha;
};

ForwardResult forward(const MlpModel& model, const Point2& x);

struct TrainConfig {
  LossKind loss_kind = LossKind::kUfceEusEr;
  LossConfig loss;
  double learning_rate = 1e-3;
  double weight_decay = 1e-7;
  int batch_size = 128;
  int epochs = 50;
  int hidden = 64;
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument naming the offending "train.*" key.
  void validate() const;
};

/// Mean objective over a batch of ID and pseudo-OOD points; true-OOD points
/// are rejected. Pseudo-OOD points only enter kinds for which
/// uses_pseudo_ood() holds.
double batch_loss(const MlpModel& model, std::span<const LabeledPoint> batch, LossKind kind,
                  const LossConfig& cfg);

struct BackwardResult {
  double loss = 0.0;
  std::vector<double> grad;   // same layout as MlpModel::params
  std::size_t saturated = 0;  // evidential samples with every logit <= 0
};

/// Exact parameter gradient of batch_loss. The EUS multiplier is a constant
/// with respect to the parameters.
BackwardResult backward(const MlpModel& model, std::span<const LabeledPoint> batch, LossKind kind,
                        const LossConfig& cfg);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;
};

/// One Adam update (0.9, 0.999, 1e-8); weight decay is added to the gradient.
void adam_step(std::vector<double>& params, std::span<const double> grad, AdamState& state,
               double learning_rate, double weight_decay);

struct EpochRecord {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_ece = 0.0;
  std::optional<double> val_ood_auroc;
  std::optional<double> val_ood_aupr;
  std::size_t saturated = 0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;

  void write_csv(const std::filesystem::path& path) const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  MlpModel model;
  TrainingHistory history;
};

TrainResult train(const TrainConfig& cfg, const DatasetSplit& split);

struct Uncertainties {
  std::vector<double> p_bar;
  double u_alea = 0.0;  // -max p_bar
  double u_epis = 0.0;  // C / alpha_0
  double energy = 0.0;  // -ln sum exp(logits)
  double softmax_entropy = 0.0;
};

/// All scores from one forward pass. p_bar is the Dirichlet mean for an
/// evidential head and softmax(logits) for a softmax head.
Uncertainties predict_uncertainties(const MlpModel& model, const Point2& x);

}  // namespace evidloss
