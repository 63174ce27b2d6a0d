#include "evidloss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evidloss/specfn.hpp"

namespace evidloss {

using specfn::digamma;

namespace {

void check_class(const DirichletParams& alpha, std::size_t c_star, const char* fn) {
  if (c_star >= alpha.classes()) {
    throw InvalidParameters(std::string(fn) + ": class index " + std::to_string(c_star) +
                            " out of range for C=" + std::to_string(alpha.classes()));
  }
}

// alpha_0 - alpha_c summed directly, avoiding cancellation when alpha_c dominates.
double rest_strength(const DirichletParams& alpha, std::size_t c_star) {
  double rest = 0.0;
  for (std::size_t k = 0; k < alpha.classes(); ++k) {
    if (k != c_star) rest += alpha[k];
  }
  return rest;
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite result");
  return v;
}

}  // namespace

void LossConfig::validate() const {
  auto fail = [](const char* key, const char* why) {
    throw std::invalid_argument(std::string("loss.") + key + ": " + why);
  };
  if (!(gamma >= 0.0 && gamma <= 5.0)) fail("gamma", "must lie in [0, 5]");
  if (!(beta >= 0.0)) fail("beta", "must be >= 0");
  if (!(lambda >= 0.0)) fail("lambda", "must be >= 0");
  if (!(xi >= 0.0)) fail("xi", "must be >= 0");
  if (!(temperature > 0.0)) fail("temperature", "must be > 0");
  if (!std::isfinite(m_in)) fail("m_in", "must be finite");
  if (!std::isfinite(m_out)) fail("m_out", "must be finite");
  if (!(positive_class_weight > 0.0)) fail("positive_class_weight", "must be > 0");
  if (!(eta >= 0.0)) fail("eta", "must be >= 0");
}

SupervisedSample SupervisedSample::in_distribution(DirichletParams alpha,
                                                   std::size_t true_class) {
  if (true_class >= alpha.classes()) {
    throw InvalidParameters("SupervisedSample: class index out of range");
  }
  return SupervisedSample{std::move(alpha), true_class, SampleRole::kInDistribution};
}

SupervisedSample SupervisedSample::pseudo_ood(DirichletParams alpha) {
  return SupervisedSample{std::move(alpha), std::nullopt, SampleRole::kPseudoOod};
}

double uce(const DirichletParams& alpha, std::size_t c_star) {
  check_class(alpha, c_star, "uce");
  return digamma(alpha.strength()) - digamma(alpha[c_star]);
}

double uce_digamma_sum(double alpha_c, int classes) {
  if (!(alpha_c >= 1.0) || classes < 2) {
    throw InvalidParameters("uce_digamma_sum: need alpha_c >= 1 and K >= 2");
  }
  double s = 0.0;
  for (int k = 0; k <= classes - 2; ++k) s += 1.0 / (alpha_c + k);
  return s;
}

double ufce_log_ratio(double alpha0, double alpha_c, double gamma) {
  const double rest = alpha0 - alpha_c;
  return specfn::ln_gamma_ratio(rest, gamma) - specfn::ln_gamma_ratio(alpha0, gamma);
}

double ufce(const DirichletParams& alpha, std::size_t c_star, double gamma) {
  check_class(alpha, c_star, "ufce");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameters("ufce: gamma must be finite and >= 0");
  }
  const double a0 = alpha.strength();
  const double ac = alpha[c_star];
  const double rest = rest_strength(alpha, c_star);
  const double log_ratio =
      specfn::ln_gamma_ratio(rest, gamma) - specfn::ln_gamma_ratio(a0, gamma);
  const double value = std::exp(require_finite(log_ratio, "ufce ratio")) *
                       (digamma(a0 + gamma) - digamma(ac));
  return require_finite(value, "ufce");
}

double ufce_integer_gamma(double alpha_c, int classes, int gamma) {
  if (gamma < 1) throw InvalidParameters("ufce_integer_gamma: gamma must be a positive integer");
  if (!(alpha_c >= 1.0) || classes < 2) {
    throw InvalidParameters("ufce_integer_gamma: need alpha_c >= 1 and K >= 2");
  }
  const double alpha0 = alpha_c + (classes - 1);
  // G(a0) / G(a0 + g) and G(K - 1 + g) / G(K - 1) as finite products
  double ratio = 1.0;
  for (int i = 0; i < gamma; ++i) {
    ratio *= (classes - 1 + i) / (alpha0 + i);
  }
  double harmonic = 0.0;
  for (int k = 0; k <= classes - 2 + gamma; ++k) harmonic += 1.0 / (alpha_c + k);
  return ratio * harmonic;
}

double ent_regularizer(const DirichletParams& alpha) {
  return dirichlet_kl(alpha, DirichletParams::uniform(alpha.classes()));
}

double uce_ent_objective(const DirichletParams& alpha, std::size_t c_star, double beta) {
  if (!(beta >= 0.0)) throw InvalidParameters("uce_ent_objective: beta must be >= 0");
  const double base = uce(alpha, c_star);
  if (beta == 0.0) return base;
  return base + beta * ent_regularizer(alpha);
}

double eus_multiplier(double alpha0, std::size_t classes, double xi) {
  if (!(xi >= 0.0) || !(alpha0 >= static_cast<double>(classes))) {
    throw InvalidParameters("eus_multiplier: need xi >= 0 and alpha_0 >= C");
  }
  return 1.0 + static_cast<double>(classes) * xi / alpha0;
}

double ufce_eus(const DirichletParams& alpha, std::size_t c_star, double gamma, double xi) {
  return eus_multiplier(alpha.strength(), alpha.classes(), xi) * ufce(alpha, c_star, gamma);
}

double er_loss(const DirichletParams& alpha) { return ent_regularizer(alpha); }

double class_weight(std::size_t true_class, const LossConfig& cfg) {
  return true_class == 0 ? cfg.positive_class_weight : 1.0;
}

double combined_objective(std::span<const SupervisedSample> batch, const LossConfig& cfg) {
  double id_sum = 0.0;
  double ood_sum = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  for (const auto& s : batch) {
    if (s.role == SampleRole::kInDistribution) {
      if (!s.true_class) throw InvalidParameters("combined_objective: ID sample without label");
      id_sum += class_weight(*s.true_class, cfg) *
                ufce_eus(s.alpha, *s.true_class, cfg.gamma, cfg.xi);
      ++n_id;
    } else {
      ood_sum += er_loss(s.alpha);
      ++n_ood;
    }
  }
  if (n_id == 0) throw InvalidParameters("combined_objective: batch has no ID samples");
  double total = id_sum / static_cast<double>(n_id);
  if (n_ood > 0) total += cfg.lambda * ood_sum / static_cast<double>(n_ood);
  return total;
}

double cross_entropy(const SimplexVector& p, std::size_t c_star) {
  if (c_star >= p.size()) throw InvalidParameters("cross_entropy: class index out of range");
  if (p[c_star] <= 0.0) throw SaturationError("cross_entropy: p[c*] == 0");
  return -std::log(p[c_star]);
}

double focal(const SimplexVector& p, std::size_t c_star, double gamma) {
  if (c_star >= p.size()) throw InvalidParameters("focal: class index out of range");
  if (p[c_star] <= 0.0) throw SaturationError("focal: p[c*] == 0");
  if (gamma == 0.0) return -std::log(p[c_star]);
  return -std::pow(1.0 - p[c_star], gamma) * std::log(p[c_star]);
}

namespace {

void check_logits(std::span<const double> logits, const char* fn) {
  if (logits.empty()) throw InvalidParameters(std::string(fn) + ": empty logits");
  for (double l : logits) {
    if (!std::isfinite(l)) throw InvalidParameters(std::string(fn) + ": non-finite logit");
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  check_logits(logits, "softmax");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp((logits[k] - top) / temperature);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

double softmax_entropy(std::span<const double> logits) {
  check_logits(logits, "softmax_entropy");
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - top);
  const double log_total = std::log(total);
  double h = 0.0;
  for (double l : logits) {
    const double z = l - top;
    const double p = std::exp(z - log_total);
    h -= p * (z - log_total);
  }
  return std::max(h, 0.0);
}

double energy_score(std::span<const double> logits, double temperature) {
  check_logits(logits, "energy_score");
  if (!(temperature > 0.0)) throw InvalidParameters("energy_score: temperature must be > 0");
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp((l - top) / temperature);
  return -top - temperature * std::log(total);
}

double energy_bound_penalty(std::span<const double> e_in, std::span<const double> e_out,
                            double m_in, double m_out) {
  if (e_in.empty() && e_out.empty()) {
    throw InvalidParameters("energy_bound_penalty: both energy sets are empty");
  }
  if (!std::isfinite(m_in) || !std::isfinite(m_out)) {
    throw InvalidParameters("energy_bound_penalty: margins must be finite");
  }
  double total = 0.0;
  if (!e_in.empty()) {
    double s = 0.0;
    for (double e : e_in) {
      const double h = std::max(0.0, e - m_in);
      s += h * h;
    }
    total += s / static_cast<double>(e_in.size());
  }
  if (!e_out.empty()) {
    double s = 0.0;
    for (double e : e_out) {
      const double h = std::max(0.0, m_out - e);
      s += h * h;
    }
    total += s / static_cast<double>(e_out.size());
  }
  return total;
}

}  // namespace evidloss
