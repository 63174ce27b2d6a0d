#include "evidloss/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "evidloss/evaluate.hpp"
#include "evidloss/gradients.hpp"
#include "evidloss/random.hpp"

namespace evidloss {

namespace {

constexpr double kProbFloor = 1e-12;

struct KindName {
  LossKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LossKind::kUceEnt, "uce_ent"},
    {LossKind::kUfce, "ufce"},
    {LossKind::kUfceEusEr, "ufce_eus_er"},
    {LossKind::kUceEusEr, "uce_eus_er"},
    {LossKind::kCrossEntropy, "ce"},
    {LossKind::kFocal, "focal"},
    {LossKind::kEnergyBoundedCe, "energy_bounded_ce"},
    {LossKind::kEnergyBoundedFocal, "energy_bounded_focal"},
};

}  // namespace

std::string loss_kind_name(LossKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "?";
}

std::optional<LossKind> parse_loss_kind(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  return std::nullopt;
}

bool is_evidential(LossKind kind) {
  switch (kind) {
    case LossKind::kUceEnt:
    case LossKind::kUfce:
    case LossKind::kUfceEusEr:
    case LossKind::kUceEusEr:
      return true;
    default:
      return false;
  }
}

bool uses_pseudo_ood(LossKind kind) {
  switch (kind) {
    case LossKind::kUfceEusEr:
    case LossKind::kUceEusEr:
    case LossKind::kEnergyBoundedCe:
    case LossKind::kEnergyBoundedFocal:
      return true;
    default:
      return false;
  }
}

HeadKind head_for(LossKind kind) {
  return is_evidential(kind) ? HeadKind::kEvidential : HeadKind::kSoftmax;
}

// Model -------------------------------------------------------------------------

MlpModel MlpModel::zeros(std::size_t classes, std::size_t hidden, HeadKind head) {
  if (classes < 2) throw std::invalid_argument("MlpModel: need at least 2 classes");
  if (hidden < 1) throw std::invalid_argument("MlpModel: hidden width must be >= 1");
  MlpModel m;
  m.widths = {2, hidden, hidden, classes};
  m.head = head;
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < m.widths.size(); ++l) n += (m.widths[l] + 1) * m.widths[l + 1];
  m.params.assign(n, 0.0);
  return m;
}

MlpModel MlpModel::initialized(std::size_t classes, std::size_t hidden, HeadKind head,
                               std::uint64_t seed) {
  MlpModel m = zeros(classes, hidden, head);
  Rng rng = Rng::derive(seed, "init");
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.widths[l]));
    const std::size_t begin = m.weight_offset(l);
    const std::size_t end = m.bias_offset(l) + m.widths[l + 1];
    for (std::size_t i = begin; i < end; ++i) m.params[i] = rng.uniform(-bound, bound);
  }
  // A class whose logit starts negative on all of its own points never
  // receives gradient through the rectifier, so evidential heads start alive.
  if (head == HeadKind::kEvidential) {
    const std::size_t last = m.layer_count() - 1;
    for (std::size_t k = 0; k < classes; ++k) m.params[m.bias_offset(last) + k] = 1.0;
  }
  return m;
}

std::size_t MlpModel::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += (widths[l] + 1) * widths[l + 1];
  return off;
}

std::size_t MlpModel::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + widths[layer] * widths[layer + 1];
}

nlohmann::ordered_json MlpModel::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = kModelVersion;
  j["architecture"] = {{"widths", widths},
                       {"activation", "relu"},
                       {"head", head == HeadKind::kEvidential ? "evidential" : "softmax"}};
  auto layers = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto w0 = params.begin() + static_cast<std::ptrdiff_t>(weight_offset(l));
    const auto b0 = params.begin() + static_cast<std::ptrdiff_t>(bias_offset(l));
    nlohmann::ordered_json layer;
    layer["rows"] = widths[l + 1];
    layer["cols"] = widths[l];
    layer["weights"] = std::vector<double>(w0, b0);
    layer["bias"] = std::vector<double>(b0, b0 + static_cast<std::ptrdiff_t>(widths[l + 1]));
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) throw std::runtime_error("model: missing version");
  if (j.at("version") != kModelVersion) {
    throw std::runtime_error("model: version mismatch, expected " + std::string(kModelVersion));
  }
  try {
    const auto& arch = j.at("architecture");
    MlpModel m;
    m.widths = arch.at("widths").get<std::vector<std::size_t>>();
    if (m.widths.size() != 4 || m.widths[0] != 2) throw std::runtime_error("model: bad widths");
    const auto head = arch.at("head").get<std::string>();
    if (head == "evidential") {
      m.head = HeadKind::kEvidential;
    } else if (head == "softmax") {
      m.head = HeadKind::kSoftmax;
    } else {
      throw std::runtime_error("model: unknown head '" + head + "'");
    }
    const auto& layers = j.at("layers");
    if (layers.size() != m.widths.size() - 1) throw std::runtime_error("model: layer count");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (w.size() != m.widths[l] * m.widths[l + 1] || b.size() != m.widths[l + 1]) {
        throw std::runtime_error("model: layer " + std::to_string(l) + " has wrong size");
      }
      m.params.insert(m.params.end(), w.begin(), w.end());
      m.params.insert(m.params.end(), b.begin(), b.end());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model: ") + e.what());
  }
}

void MlpModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json().dump(1) << '\n';
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return from_json(j);
}

// Forward / backward -------------------------------------------------------------

namespace {

// Pre-activations z_l and activations a_l for every layer; a_0 is the input.
struct Trace {
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> z;
};

Trace run(const MlpModel& model, const Point2& x) {
  if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw ForwardError("forward: non-finite input");
  Trace t;
  t.a.push_back({x[0], x[1]});
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const std::size_t in = model.widths[l], out = model.widths[l + 1];
    const double* w = model.params.data() + model.weight_offset(l);
    const double* b = model.params.data() + model.bias_offset(l);
    const auto& prev = t.a.back();
    std::vector<double> z(out);
    for (std::size_t r = 0; r < out; ++r) {
      double s = b[r];
      for (std::size_t c = 0; c < in; ++c) s += w[r * in + c] * prev[c];
      z[r] = s;
    }
    const bool hidden = l + 1 < model.layer_count();
    std::vector<double> a(z);
    if (hidden) {
      for (double& v : a) v = std::max(v, 0.0);
    }
    t.z.push_back(std::move(z));
    t.a.push_back(std::move(a));
  }
  for (double v : t.z.back()) {
    if (!std::isfinite(v)) throw ForwardError("forward: non-finite logits");
  }
  return t;
}

DirichletParams head_alpha(std::span<const double> logits) {
  std::vector<double> alpha(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) alpha[k] = std::max(logits[k], 0.0) + 1.0;
  return DirichletParams(std::move(alpha));
}

// Accumulates d(loss)/d(params) given d(loss)/d(logits) for one sample.
void accumulate(const MlpModel& model, const Trace& t, std::vector<double> delta,
                std::vector<double>& grad) {
  for (std::size_t l = model.layer_count(); l-- > 0;) {
    const std::size_t in = model.widths[l], out = model.widths[l + 1];
    const double* w = model.params.data() + model.weight_offset(l);
    double* gw = grad.data() + model.weight_offset(l);
    double* gb = grad.data() + model.bias_offset(l);
    const auto& prev = t.a[l];
    for (std::size_t r = 0; r < out; ++r) {
      if (delta[r] == 0.0) continue;
      gb[r] += delta[r];
      for (std::size_t c = 0; c < in; ++c) gw[r * in + c] += delta[r] * prev[c];
    }
    if (l == 0) break;
    std::vector<double> back(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      if (delta[r] == 0.0) continue;
      for (std::size_t c = 0; c < in; ++c) back[c] += w[r * in + c] * delta[r];
    }
    const auto& z_prev = t.z[l - 1];
    for (std::size_t c = 0; c < in; ++c) {
      if (!(z_prev[c] > 0.0)) back[c] = 0.0;
    }
    delta = std::move(back);
  }
}

// -ln p_c* and its focal variant with the probability floored at 1e-12.
double clamped_det_loss(std::span<const double> p, std::size_t c, bool focal_kind, double gamma) {
  const double pc = std::max(p[c], kProbFloor);
  if (!focal_kind || gamma == 0.0) return -std::log(pc);
  double rest = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k != c) rest += p[k];
  }
  return -std::pow(rest, gamma) * std::log(pc);
}

struct BatchPlan {
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
};

BatchPlan plan(std::span<const LabeledPoint> batch, LossKind kind, std::size_t classes) {
  if (batch.empty()) throw std::invalid_argument("batch is empty");
  BatchPlan p;
  for (const auto& pt : batch) {
    switch (pt.role) {
      case PointRole::kInDistribution:
        if (pt.label < 0 || static_cast<std::size_t>(pt.label) >= classes) {
          throw std::invalid_argument("batch: label out of range");
        }
        ++p.n_id;
        break;
      case PointRole::kPseudoOod:
        ++p.n_ood;
        break;
      case PointRole::kTrueOod:
        throw std::invalid_argument("batch: true-OOD points are never trained on");
    }
  }
  if (!uses_pseudo_ood(kind)) p.n_ood = 0;
  if (p.n_id == 0 && p.n_ood == 0) throw std::invalid_argument("batch has no usable samples");
  return p;
}

double focal_or_zero_gamma(LossKind kind, const LossConfig& cfg) {
  return kind == LossKind::kUceEusEr ? 0.0 : cfg.gamma;
}

// Shared worker for batch_loss and backward; grad is skipped when null.
double evaluate_batch(const MlpModel& model, std::span<const LabeledPoint> batch, LossKind kind,
                      const LossConfig& cfg, std::vector<double>* grad, std::size_t* saturated) {
  const std::size_t classes = model.classes();
  const BatchPlan bp = plan(batch, kind, classes);
  const double inv_id = bp.n_id ? 1.0 / static_cast<double>(bp.n_id) : 0.0;
  const double inv_ood = bp.n_ood ? 1.0 / static_cast<double>(bp.n_ood) : 0.0;
  const bool energy_kind =
      kind == LossKind::kEnergyBoundedCe || kind == LossKind::kEnergyBoundedFocal;
  const bool focal_kind = kind == LossKind::kFocal || kind == LossKind::kEnergyBoundedFocal;

  double id_term = 0.0, ood_term = 0.0, pen_in = 0.0, pen_out = 0.0;
  for (const auto& pt : batch) {
    const bool is_id = pt.role == PointRole::kInDistribution;
    if (!is_id && bp.n_ood == 0) continue;
    const Trace t = run(model, pt.x);
    const auto& logits = t.z.back();
    std::vector<double> d_logits(classes, 0.0);

    if (is_evidential(kind)) {
      const DirichletParams alpha = head_alpha(logits);
      std::vector<double> d_alpha;
      if (is_id) {
        const auto c = static_cast<std::size_t>(pt.label);
        const double w = class_weight(c, cfg) * inv_id;
        double value = 0.0, scale = w;
        switch (kind) {
          case LossKind::kUceEnt:
            value = uce_ent_objective(alpha, c, cfg.beta);
            if (grad) {
              d_alpha = uce_grad_alpha(alpha, c);
              const auto kl = kl_to_flat_grad_alpha(alpha);
              for (std::size_t k = 0; k < classes; ++k) d_alpha[k] += cfg.beta * kl[k];
            }
            break;
          case LossKind::kUfce:
            value = ufce(alpha, c, cfg.gamma);
            if (grad) d_alpha = ufce_grad_alpha(alpha, c, cfg.gamma);
            break;
          default: {
            const double g = focal_or_zero_gamma(kind, cfg);
            const double mult = eus_multiplier(alpha.strength(), classes, cfg.xi);
            value = mult * ufce(alpha, c, g);
            scale = w * mult;
            if (grad) d_alpha = ufce_grad_alpha(alpha, c, g);
          }
        }
        id_term += class_weight(c, cfg) * value;
        if (grad) {
          for (double& v : d_alpha) v *= scale;
        }
      } else {
        ood_term += er_loss(alpha);
        if (grad) {
          d_alpha = kl_to_flat_grad_alpha(alpha);
          for (double& v : d_alpha) v *= cfg.lambda * inv_ood;
        }
      }
      if (grad) {
        bool dead = true;
        for (std::size_t k = 0; k < classes; ++k) {
          if (logits[k] > 0.0) {
            d_logits[k] = d_alpha[k];
            dead = false;
          }
        }
        if (dead && saturated) ++*saturated;
      }
    } else {
      if (is_id) {
        const auto c = static_cast<std::size_t>(pt.label);
        const double w = class_weight(c, cfg) * inv_id;
        const auto p = softmax(logits, 1.0);
        id_term += class_weight(c, cfg) * clamped_det_loss(p, c, focal_kind, cfg.gamma);
        if (grad) {
          d_logits = focal_kind ? focal_grad_logits(logits, c, cfg.gamma, kProbFloor)
                                : cross_entropy_grad_logits(logits, c);
          for (double& v : d_logits) v *= w;
        }
      }
      if (energy_kind) {
        const double e = energy_score(logits, cfg.temperature);
        double d_e = 0.0;
        if (is_id) {
          const double h = std::max(0.0, e - cfg.m_in);
          pen_in += h * h;
          d_e = 2.0 * h * inv_id;
        } else {
          const double h = std::max(0.0, cfg.m_out - e);
          pen_out += h * h;
          d_e = -2.0 * h * inv_ood;
        }
        if (grad && d_e != 0.0) {
          const auto de_ds = energy_grad_logits(logits, cfg.temperature);
          for (std::size_t k = 0; k < classes; ++k) d_logits[k] += cfg.eta * d_e * de_ds[k];
        }
      }
    }
    if (grad) accumulate(model, t, std::move(d_logits), *grad);
  }
  const double loss = id_term * inv_id + cfg.lambda * ood_term * inv_ood +
                      cfg.eta * (pen_in * inv_id + pen_out * inv_ood);
  return loss;
}

}  // namespace

ForwardResult forward(const MlpModel& model, const Point2& x) {
  Trace t = run(model, x);
  auto logits = std::move(t.z.back());
  DirichletParams alpha = head_alpha(logits);
  return {std::move(logits), std::move(alpha)};
}

double batch_loss(const MlpModel& model, std::span<const LabeledPoint> batch, LossKind kind,
                  const LossConfig& cfg) {
  return evaluate_batch(model, batch, kind, cfg, nullptr, nullptr);
}

BackwardResult backward(const MlpModel& model, std::span<const LabeledPoint> batch, LossKind kind,
                        const LossConfig& cfg) {
  BackwardResult r;
  r.grad.assign(model.params.size(), 0.0);
  r.loss = evaluate_batch(model, batch, kind, cfg, &r.grad, &r.saturated);
  return r;
}

void adam_step(std::vector<double>& params, std::span<const double> grad, AdamState& state,
               double learning_rate, double weight_decay) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] + weight_decay * params[i];
    state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * g;
    state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * g * g;
    params[i] -= learning_rate * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + kEps);
  }
}

// Training ---------------------------------------------------------------------

void TrainConfig::validate() const {
  loss.validate();
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("train." + key + ": " + why);
  };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate", "must be finite and >= 0");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    fail("weight_decay", "must be finite and >= 0");
  }
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (epochs < 1) fail("epochs", "must be >= 1");
  if (hidden < 1) fail("hidden", "must be >= 1");
}

namespace {

std::string opt_field(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

EpochRecord snapshot(int epoch, const MlpModel& model, std::span<const LabeledPoint> train_set,
                     std::span<const LabeledPoint> val_set, const TrainConfig& cfg,
                     std::size_t saturated) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.train_loss = batch_loss(model, train_set, cfg.loss_kind, cfg.loss);
  rec.saturated = saturated;
  bool has_id = false;
  for (const auto& p : val_set) has_id = has_id || p.role == PointRole::kInDistribution;
  if (has_id) {
    const auto report = evaluate(model, val_set, default_scorer(cfg.loss_kind), false);
    rec.val_accuracy = report.accuracy;
    rec.val_ece = report.ece;
    if (report.ood) {
      rec.val_ood_auroc = report.ood->auroc;
      rec.val_ood_aupr = report.ood->aupr;
    }
  }
  return rec;
}

}  // namespace

void TrainingHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "epoch,train_loss,val_accuracy,val_ece,val_ood_auroc,val_ood_aupr,saturated\n";
  for (const auto& r : epochs) {
    out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.val_accuracy) << ','
        << num(r.val_ece) << ',' << opt_field(r.val_ood_auroc) << ','
        << opt_field(r.val_ood_aupr) << ',' << r.saturated << '\n';
  }
}

TrainResult train(const TrainConfig& cfg, const DatasetSplit& split) {
  cfg.validate();
  const bool with_ood = uses_pseudo_ood(cfg.loss_kind);
  std::vector<LabeledPoint> train_set;
  std::size_t classes = 0;
  for (const auto& p : split.train) {
    if (p.role == PointRole::kInDistribution) {
      classes = std::max(classes, static_cast<std::size_t>(p.label) + 1);
      train_set.push_back(p);
    } else if (p.role == PointRole::kPseudoOod && with_ood) {
      train_set.push_back(p);
    }
  }
  if (classes < 2) throw std::invalid_argument("train: training split needs at least 2 classes");

  TrainResult result{MlpModel::initialized(classes, static_cast<std::size_t>(cfg.hidden),
                                           head_for(cfg.loss_kind), cfg.seed),
                     {}};
  MlpModel& model = result.model;
  result.history.epochs.push_back(snapshot(0, model, train_set, split.val, cfg, 0));

  Rng shuffle_rng = Rng::derive(cfg.seed, "shuffle");
  AdamState adam;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LabeledPoint> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    std::size_t saturated = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);
      BackwardResult br;
      try {
        br = backward(model, batch, cfg.loss_kind, cfg.loss);
      } catch (const std::exception& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index) + ": " + e.what());
      }
      if (!std::isfinite(br.loss)) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index) + ": non-finite loss");
      }
      saturated += br.saturated;
      adam_step(model.params, br.grad, adam, cfg.learning_rate, cfg.weight_decay);
    }
    EpochRecord rec;
    try {
      rec = snapshot(epoch, model, train_set, split.val, cfg, saturated);
    } catch (const std::exception& e) {
      throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(rec.train_loss)) {
      throw TrainingDiverged("epoch " + std::to_string(epoch) + ": non-finite train loss");
    }
    result.history.epochs.push_back(rec);
  }
  return result;
}

Uncertainties predict_uncertainties(const MlpModel& model, const Point2& x) {
  const ForwardResult fr = forward(model, x);
  Uncertainties u;
  if (model.head == HeadKind::kEvidential) {
    const auto mean = mean_probability(fr.alpha);
    u.p_bar.assign(mean.values().begin(), mean.values().end());
  } else {
    u.p_bar = softmax(fr.logits, 1.0);
  }
  u.u_alea = -*std::max_element(u.p_bar.begin(), u.p_bar.end());
  u.u_epis = epistemic_uncertainty(fr.alpha);
  u.energy = energy_score(fr.logits, 1.0);
  u.softmax_entropy = softmax_entropy(fr.logits);
  return u;
}

}  // namespace evidloss
