#include "evidloss/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "evidloss/specfn.hpp"

namespace evidloss {

using specfn::digamma;
using specfn::ln_gamma;

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw InvalidParameters("DirichletParams: need at least 2 classes, got " +
                            std::to_string(alpha_.size()));
  }
  for (std::size_t k = 0; k < alpha_.size(); ++k) {
    if (!std::isfinite(alpha_[k]) || alpha_[k] < 1.0) {
      throw InvalidParameters("DirichletParams: alpha[" + std::to_string(k) +
                              "] must be finite and >= 1, got " + std::to_string(alpha_[k]));
    }
  }
  strength_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
  if (!std::isfinite(strength_)) throw InvalidParameters("DirichletParams: alpha_0 overflow");
}

DirichletParams DirichletParams::uniform(std::size_t classes) {
  return DirichletParams(std::vector<double>(classes, 1.0));
}

SimplexVector::SimplexVector(std::vector<double> p) : p_(std::move(p)) {
  double total = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameters("SimplexVector: entry outside [0,1]");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12 * static_cast<double>(std::max<std::size_t>(p_.size(), 1))) {
    throw InvalidParameters("SimplexVector: entries sum to " + std::to_string(total));
  }
}

double ln_multivariate_beta(std::span<const double> alpha) {
  double sum = 0.0;
  double total = 0.0;
  for (double a : alpha) {
    sum += ln_gamma(a);
    total += a;
  }
  return sum - ln_gamma(total);
}

SimplexVector mean_probability(const DirichletParams& d) {
  std::vector<double> p(d.classes());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = d[k] / d.strength();
  return SimplexVector(std::move(p));
}

double epistemic_uncertainty(const DirichletParams& d) {
  return static_cast<double>(d.classes()) / d.strength();
}

double aleatoric_uncertainty(const DirichletParams& d) {
  const auto a = d.alpha();
  return -*std::max_element(a.begin(), a.end()) / d.strength();
}

double dirichlet_entropy(const DirichletParams& d) {
  const double a0 = d.strength();
  const double c = static_cast<double>(d.classes());
  double tail = 0.0;
  for (double a : d.alpha()) tail += (a - 1.0) * digamma(a);
  return ln_multivariate_beta(d.alpha()) + (a0 - c) * digamma(a0) - tail;
}

double dirichlet_kl(const DirichletParams& d, const DirichletParams& target) {
  if (d.classes() != target.classes()) {
    throw InvalidParameters("dirichlet_kl: dimension mismatch (" + std::to_string(d.classes()) +
                            " vs " + std::to_string(target.classes()) + ")");
  }
  const double psi0 = digamma(d.strength());
  double cross = 0.0;
  for (std::size_t k = 0; k < d.classes(); ++k) {
    cross += (d[k] - target[k]) * (digamma(d[k]) - psi0);
  }
  const double kl = ln_multivariate_beta(target.alpha()) - ln_multivariate_beta(d.alpha()) + cross;
  // rounding can leave -1e-16 for identical arguments
  return std::max(kl, 0.0);
}

double dirichlet_log_density(const DirichletParams& d, std::span<const double> p) {
  if (p.size() != d.classes()) throw InvalidParameters("dirichlet_log_density: dimension mismatch");
  double s = -ln_multivariate_beta(d.alpha());
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (d[k] != 1.0) s += (d[k] - 1.0) * std::log(p[k]);
  }
  return s;
}

double expected_p_log_p(const DirichletParams& d, std::size_t c) {
  if (c >= d.classes()) {
    throw InvalidParameters("expected_p_log_p: class index " + std::to_string(c) +
                            " out of range");
  }
  const double a0 = d.strength();
  return d[c] / a0 * (digamma(d[c] + 1.0) - digamma(a0 + 1.0));
}

double expected_categorical_entropy(const DirichletParams& d) {
  double h = 0.0;
  for (std::size_t k = 0; k < d.classes(); ++k) h -= expected_p_log_p(d, k);
  return h;
}

void sample_into(const DirichletParams& d, Rng& rng, std::span<double> out) {
  if (out.size() != d.classes()) throw InvalidParameters("sample_into: output size mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = rng.gamma(d[k]);
    total += out[k];
  }
  for (double& v : out) v /= total;
}

SimplexVector sample(const DirichletParams& d, Rng& rng) {
  std::vector<double> p(d.classes());
  sample_into(d, rng, p);
  return SimplexVector(std::move(p));
}

}  // namespace evidloss
