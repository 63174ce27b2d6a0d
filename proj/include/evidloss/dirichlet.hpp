#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "evidloss/random.hpp"

namespace evidloss {

class InvalidParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Concentration vector of a Dirichlet over C >= 2 classes, every entry >= 1.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha);

  /// Flat Dirichlet, alpha = 1 for all classes.
  static DirichletParams uniform(std::size_t classes);

  std::span<const double> alpha() const { return alpha_; }
  double operator[](std::size_t k) const { return alpha_[k]; }
  std::size_t classes() const { return alpha_.size(); }
  double strength() const { return strength_; }

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
  double strength_;
};

/// Point of the probability simplex.
class SimplexVector {
 public:
  explicit SimplexVector(std::vector<double> p);

  std::span<const double> values() const { return p_; }
  double operator[](std::size_t k) const { return p_[k]; }
  std::size_t size() const { return p_.size(); }

 private:
  std::vector<double> p_;
};

/// Multivariate ln B(alpha) = sum_k lnG(alpha_k) - lnG(alpha_0).
double ln_multivariate_beta(std::span<const double> alpha);

SimplexVector mean_probability(const DirichletParams& d);
/// C / alpha_0.
double epistemic_uncertainty(const DirichletParams& d);
/// -max_k alpha_k / alpha_0.
double aleatoric_uncertainty(const DirichletParams& d);

double dirichlet_entropy(const DirichletParams& d);
/// KL(Dir(d) || Dir(target)).
double dirichlet_kl(const DirichletParams& d, const DirichletParams& target);
/// ln Dir(p | alpha).
double dirichlet_log_density(const DirichletParams& d, std::span<const double> p);

/// E[p_c ln p_c] = (alpha_c / alpha_0) [psi(alpha_c + 1) - psi(alpha_0 + 1)].
double expected_p_log_p(const DirichletParams& d, std::size_t c);
/// E[H(p)] of the categorical drawn from the Dirichlet.
double expected_categorical_entropy(const DirichletParams& d);

/// One draw via normalised Gamma(alpha_k, 1) variates.
SimplexVector sample(const DirichletParams& d, Rng& rng);
/// Allocation-free variant; `out` must have d.classes() entries.
void sample_into(const DirichletParams& d, Rng& rng, std::span<double> out);

}  // namespace evidloss
