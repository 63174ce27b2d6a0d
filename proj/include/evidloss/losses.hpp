#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "evidloss/dirichlet.hpp"

namespace evidloss {

/// Loss hyperparameters shared by every objective.
struct LossConfig {
  double gamma = 1.0;         // focal exponent
  double beta = 0.001;        // ENT weight
  double lambda = 0.01;       // ER weight
  double xi = 64.0;           // EUS scale
  double temperature = 1.0;   // energy temperature
  double m_in = -6.0;         // energy margin, in-distribution
  double m_out = -1.0;        // energy margin, pseudo-OOD
  double positive_class_weight = 1.0;
  double eta = 0.0001;        // energy-bound penalty weight

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class SampleRole { kInDistribution, kPseudoOod };

struct SupervisedSample {
  DirichletParams alpha;
  std::optional<std::size_t> true_class;  // set iff role is in-distribution
  SampleRole role = SampleRole::kInDistribution;

  static SupervisedSample in_distribution(DirichletParams alpha, std::size_t true_class);
  static SupervisedSample pseudo_ood(DirichletParams alpha);
};

/// p_{c*} == 0 in a deterministic loss (the loss would be +inf).
class SaturationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite intermediate inside a closed form.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evidential losses -----------------------------------------------------------

/// E[-ln p_c*] = psi(alpha_0) - psi(alpha_c*).
double uce(const DirichletParams& alpha, std::size_t c_star);
/// UCE under alpha_0 = alpha_c + K - 1: sum_{k=0}^{K-2} 1/(alpha_c + k).
double uce_digamma_sum(double alpha_c, int classes);

/// Log of the Beta-function ratio
/// G(a0) G(a0 - ac + gamma) / (G(a0 + gamma) G(a0 - ac)).
double ufce_log_ratio(double alpha0, double alpha_c, double gamma);

/// E[-(1 - p_c*)^gamma ln p_c*] in closed form. At gamma == 0 the log-ratio is
/// exactly zero, so the result is bit-identical to uce.
double ufce(const DirichletParams& alpha, std::size_t c_star, double gamma);
/// Factorial form for integer gamma under alpha_0 = alpha_c + K - 1.
double ufce_integer_gamma(double alpha_c, int classes, int gamma);

/// KL(Dir(alpha) || Dir(1)), the smoothing regulariser.
double ent_regularizer(const DirichletParams& alpha);
/// UCE + beta * KL(Dir(alpha) || Dir(1)).
double uce_ent_objective(const DirichletParams& alpha, std::size_t c_star, double beta);

/// 1 + C xi / alpha_0.
double eus_multiplier(double alpha0, std::size_t classes, double xi);
double ufce_eus(const DirichletParams& alpha, std::size_t c_star, double gamma, double xi);
/// Flat-Dirichlet target loss applied to pseudo-OOD samples.
double er_loss(const DirichletParams& alpha);

/// mean_ID(w_i * UFCE-EUS) + lambda * mean_OOD(ER). Throws if no ID samples.
double combined_objective(std::span<const SupervisedSample> batch, const LossConfig& cfg);

/// Per-sample class weight (positive_class_weight for class 0, else 1).
double class_weight(std::size_t true_class, const LossConfig& cfg);

// Deterministic baselines -----------------------------------------------------

double cross_entropy(const SimplexVector& p, std::size_t c_star);
double focal(const SimplexVector& p, std::size_t c_star, double gamma);

std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);
double softmax_entropy(std::span<const double> logits);
/// -T ln sum_c exp(l_c / T).
double energy_score(std::span<const double> logits, double temperature);
/// mean_in max(0, e - m_in)^2 + mean_out max(0, m_out - e)^2.
double energy_bound_penalty(std::span<const double> e_in, std::span<const double> e_out,
                            double m_in, double m_out);

}  // namespace evidloss
