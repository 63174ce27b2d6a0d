#pragma once

#include <stdexcept>
#include <string>

namespace evidloss::specfn {

struct SpecialConstants {
  static constexpr double euler_mascheroni = 0.57721566490153286061;
  static constexpr double pi_sq_over_6 = 1.64493406684822643647;
};

/// Raised for arguments outside the real-positive domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// All functions accept x > 0 only; no analytic continuation to the negative
// axis. Arguments are shifted by recurrence to x >= 10 and then evaluated
// with the Stirling / Bernoulli asymptotic series.

double ln_gamma(double x);
double digamma(double x);
double trigamma(double x);
/// Second derivative of digamma (psi_2).
double tetragamma(double x);

/// ln B(a, b) = lnG(a) + lnG(b) - lnG(a + b). Symmetric bit-for-bit.
double ln_beta(double a, double b);

/// ln G(x + delta) - ln G(x) without forming either log-gamma value.
/// Accurate to a few ulps of the result even when both terms are large,
/// which is what keeps gamma-ratio losses smooth under finite differences.
double ln_gamma_ratio(double x, double delta);

}  // namespace evidloss::specfn
