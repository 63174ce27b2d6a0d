#include "evidloss/specfn.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace evidloss::specfn {
namespace {

constexpr double kAsymptoticThreshold = 10.0;

// B_2, B_4, ..., B_18
constexpr std::array<double, 9> kBernoulli = {
    1.0 / 6.0,        -1.0 / 30.0,   1.0 / 42.0,
    -1.0 / 30.0,      5.0 / 66.0,    -691.0 / 2730.0,
    7.0 / 6.0,        -3617.0 / 510.0, 43867.0 / 798.0};

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be finite and > 0, got " +
                      std::to_string(x));
  }
}

// Stirling correction sum_k B_2k / (2k (2k-1) x^(2k-1)), x >= 10.
double stirling_tail(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double term = inv;
  double sum = 0.0;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    const double n = 2.0 * static_cast<double>(k);
    sum += kBernoulli[k - 1] / (n * (n - 1.0)) * term;
    term *= inv2;
  }
  return sum;
}

double ln_gamma_large(double x) {
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         stirling_tail(x);
}

}  // namespace

double ln_gamma(double x) {
  require_positive(x, "ln_gamma");
  if (x == 1.0 || x == 2.0) return 0.0;  // exact roots; the series leaves ~1e-15 there
  if (x >= kAsymptoticThreshold) return ln_gamma_large(x);
  // lnG(x) = lnG(x + n) - ln(x (x+1) ... (x+n-1))
  double prod = 1.0;
  double y = x;
  while (y < kAsymptoticThreshold) {
    prod *= y;
    y += 1.0;
  }
  return ln_gamma_large(y) - std::log(prod);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  double term = inv2;
  double series = 0.0;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += kBernoulli[k - 1] / (2.0 * static_cast<double>(k)) * term;
    term *= inv2;
  }
  return shift + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double term = inv2 * inv;
  double series = 0.0;
  for (double b : kBernoulli) {
    series += b * term;
    term *= inv2;
  }
  return shift + inv + 0.5 * inv2 + series;
}

double tetragamma(double x) {
  require_positive(x, "tetragamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 2.0 / (x * x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double term = inv2 * inv2;
  double series = 0.0;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += (2.0 * static_cast<double>(k) + 1.0) * kBernoulli[k - 1] * term;
    term *= inv2;
  }
  return shift - inv2 - inv2 * inv - series;
}

double ln_beta(double a, double b) {
  require_positive(a, "ln_beta");
  require_positive(b, "ln_beta");
  return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
}

double ln_gamma_ratio(double x, double delta) {
  require_positive(x, "ln_gamma_ratio");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError("ln_gamma_ratio: delta must be finite and >= 0");
  }
  if (delta == 0.0) return 0.0;
  // G(x+d)/G(x) = G(y+d)/G(y) * prod_i (x+i)/(x+i+d), y = x + n >= 10
  double correction = 0.0;
  while (x < kAsymptoticThreshold) {
    correction -= std::log1p(delta / x);
    x += 1.0;
  }
  const double head = (x - 0.5) * std::log1p(delta / x) +
                      delta * std::log(x + delta) - delta;
  return head + (stirling_tail(x + delta) - stirling_tail(x)) + correction;
}

}  // namespace evidloss::specfn
