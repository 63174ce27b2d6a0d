#include "evidloss/gradients.hpp"

#include <cmath>
#include <string>

#include "evidloss/losses.hpp"
#include "evidloss/specfn.hpp"

namespace evidloss {

using specfn::digamma;
using specfn::tetragamma;
using specfn::trigamma;

namespace {

void check_class(const DirichletParams& alpha, std::size_t c_star, const char* fn) {
  if (c_star >= alpha.classes()) {
    throw InvalidParameters(std::string(fn) + ": class index out of range");
  }
}

double rest_strength(const DirichletParams& alpha, std::size_t c_star) {
  double rest = 0.0;
  for (std::size_t k = 0; k < alpha.classes(); ++k) {
    if (k != c_star) rest += alpha[k];
  }
  return rest;
}

void check_gap_domain(double p_bar, double alpha0, double gamma, const char* fn) {
  const double ac = p_bar * alpha0;
  if (!(ac > 0.0) || !(alpha0 - ac > 0.0) || !std::isfinite(alpha0) || !(gamma >= 0.0) ||
      !std::isfinite(gamma)) {
    throw InvalidParameters(std::string(fn) + ": need p_bar*alpha0 > 0, alpha0 - p_bar*alpha0 > 0 "
                            "and gamma >= 0");
  }
}

}  // namespace

std::vector<double> uce_grad_alpha(const DirichletParams& alpha, std::size_t c_star) {
  check_class(alpha, c_star, "uce_grad_alpha");
  const double t0 = trigamma(alpha.strength());
  std::vector<double> g(alpha.classes(), t0);
  g[c_star] = t0 - trigamma(alpha[c_star]);
  return g;
}

std::vector<double> ufce_grad_alpha(const DirichletParams& alpha, std::size_t c_star,
                                    double gamma) {
  check_class(alpha, c_star, "ufce_grad_alpha");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameters("ufce_grad_alpha: gamma must be finite and >= 0");
  }
  const double a0 = alpha.strength();
  const double ac = alpha[c_star];
  const double rest = rest_strength(alpha, c_star);
  const double ratio =
      std::exp(specfn::ln_gamma_ratio(rest, gamma) - specfn::ln_gamma_ratio(a0, gamma));
  const double psi_a0 = digamma(a0);
  const double psi_a0g = digamma(a0 + gamma);
  const double gap = psi_a0g - digamma(ac);  // the UCE-like digamma difference
  const double tri_a0g = trigamma(a0 + gamma);

  // d ln(ratio)/d alpha_0 with alpha_c* held fixed
  const double dlog_da0 = (psi_a0 - psi_a0g) + (digamma(rest + gamma) - digamma(rest));
  const double off = ratio * (dlog_da0 * gap + tri_a0g);
  std::vector<double> g(alpha.classes(), off);
  g[c_star] = ratio * ((psi_a0 - psi_a0g) * gap + (tri_a0g - trigamma(ac)));
  return g;
}

std::vector<double> kl_to_flat_grad_alpha(const DirichletParams& alpha) {
  const double a0 = alpha.strength();
  const double c = static_cast<double>(alpha.classes());
  const double common = (a0 - c) * trigamma(a0);
  std::vector<double> g(alpha.classes());
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] = (alpha[k] - 1.0) * trigamma(alpha[k]) - common;
  }
  return g;
}

std::vector<double> cross_entropy_grad_logits(std::span<const double> logits,
                                              std::size_t c_star) {
  auto p = softmax(logits);
  if (c_star >= p.size()) throw InvalidParameters("cross_entropy_grad_logits: class out of range");
  p[c_star] -= 1.0;
  return p;
}

std::vector<double> focal_grad_logits(std::span<const double> logits, std::size_t c_star,
                                      double gamma, double floor) {
  const auto p = softmax(logits);
  if (c_star >= p.size()) throw InvalidParameters("focal_grad_logits: class out of range");
  const double pc = std::max(p[c_star], floor);
  // 1 - p_c as the sum of the other probabilities keeps precision near p_c = 1
  double q = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k != c_star) q += p[k];
  }
  double dl_dpc;
  if (gamma == 0.0) {
    dl_dpc = -1.0 / pc;
  } else {
    const double pull = q > 0.0 ? gamma * std::pow(q, gamma - 1.0) * std::log(pc) : 0.0;
    dl_dpc = pull - std::pow(q, gamma) / pc;
  }
  // dp_c/ds_j = p_c (delta_cj - p_j)
  std::vector<double> g(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    g[j] = dl_dpc * pc * ((j == c_star ? 1.0 : 0.0) - p[j]);
  }
  return g;
}

std::vector<double> energy_grad_logits(std::span<const double> logits, double temperature) {
  auto g = softmax(logits, temperature);
  for (double& v : g) v = -v;
  return g;
}

double gradient_gap_f(double p_bar, double alpha0, double gamma) {
  check_gap_domain(p_bar, alpha0, gamma, "gradient_gap_f");
  const double ac = p_bar * alpha0;
  const double rest = alpha0 - ac;
  const double a = std::exp(specfn::ln_gamma_ratio(rest, gamma) -
                            specfn::ln_gamma_ratio(alpha0, gamma));
  const double psi_a0g = digamma(alpha0 + gamma);
  const double tri_ac = trigamma(ac);
  const double b = (digamma(alpha0) - psi_a0g) * (psi_a0g - digamma(ac)) +
                   (trigamma(alpha0 + gamma) - tri_ac);
  return -a * b + (trigamma(alpha0) - tri_ac);
}

double gradient_gap_f_derivative(double p_bar, double alpha0, double gamma) {
  check_gap_domain(p_bar, alpha0, gamma, "gradient_gap_f_derivative");
  const double ac = p_bar * alpha0;
  const double rest = alpha0 - ac;
  const double a = std::exp(specfn::ln_gamma_ratio(rest, gamma) -
                            specfn::ln_gamma_ratio(alpha0, gamma));
  const double psi_a0g = digamma(alpha0 + gamma);
  const double shift = digamma(alpha0) - psi_a0g;
  const double tri_ac = trigamma(ac);
  const double tet_ac = tetragamma(ac);
  const double b = shift * (psi_a0g - digamma(ac)) + (trigamma(alpha0 + gamma) - tri_ac);
  const double da = a * alpha0 * (digamma(rest) - digamma(rest + gamma));
  const double db = -alpha0 * (shift * tri_ac + tet_ac);
  return -da * b - a * db - alpha0 * tet_ac;
}

GradGapPoint evaluate_gradient_gap(double p_bar, double alpha0, double gamma) {
  return GradGapPoint{p_bar, alpha0, gamma, gradient_gap_f(p_bar, alpha0, gamma)};
}

double beta_ratio_g(double alpha0, double alpha_c, double gamma) {
  if (!(alpha_c >= 0.0) || !(alpha0 > alpha_c) || !(gamma > 0.0) || !std::isfinite(alpha0) ||
      !std::isfinite(gamma)) {
    throw InvalidParameters("beta_ratio_g: need alpha0 > alpha_c >= 0 and gamma > 0");
  }
  if (alpha_c == 0.0) return 1.0;
  return std::exp(specfn::ln_gamma_ratio(alpha0 - alpha_c, gamma) -
                  specfn::ln_gamma_ratio(alpha0, gamma));
}

namespace {

constexpr double kScanStep = 1e-4;
constexpr double kBisectTol = 1e-8;

double gap_at(double p_bar, double alpha_c, double gamma) {
  return gradient_gap_f(p_bar, alpha_c / p_bar, gamma);
}

// Bisect [lo, hi] where pred(lo) holds and pred(hi) does not.
template <typename Pred>
double bisect(double lo, double hi, Pred pred) {
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CrossingThresholds find_crossing_thresholds(double alpha_c_star, double gamma, int classes) {
  if (!(alpha_c_star > 1.0) || !std::isfinite(alpha_c_star) || classes < 2 ||
      !(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameters("find_crossing_thresholds: need alpha_c* > 1, gamma >= 0, K >= 2");
  }
  CrossingThresholds out;
  // Other classes carry alpha >= 1 each, so alpha_0 >= alpha_c* + K - 1.
  out.window_lo = kScanStep;
  out.window_hi = alpha_c_star / (alpha_c_star + (classes - 1));

  const auto count = static_cast<std::size_t>(std::floor((out.window_hi - out.window_lo) / kScanStep));
  std::vector<double> grid;
  std::vector<double> values;
  grid.reserve(count + 1);
  values.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    const double p = out.window_lo + static_cast<double>(i) * kScanStep;
    if (!(p < out.window_hi)) break;
    grid.push_back(p);
    values.push_back(gap_at(p, alpha_c_star, gamma));
  }

  std::size_t first_negative = grid.size();
  std::size_t last_positive = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] < 0.0 && first_negative == grid.size()) first_negative = i;
    if (values[i] > 0.0) last_positive = i;
  }
  if (first_negative == grid.size() || last_positive == grid.size()) {
    out.no_sign_change = true;
    out.tau1 = out.window_lo;
    out.tau2 = out.window_hi;
    return out;
  }

  auto non_negative = [&](double p) { return gap_at(p, alpha_c_star, gamma) >= 0.0; };
  auto positive = [&](double p) { return gap_at(p, alpha_c_star, gamma) > 0.0; };

  out.tau1 = first_negative == 0
                 ? grid.front()
                 : bisect(grid[first_negative - 1], grid[first_negative], non_negative);
  out.tau2 = last_positive + 1 >= grid.size()
                 ? grid.back()
                 : bisect(grid[last_positive], grid[last_positive + 1], positive);
  return out;
}

}  // namespace evidloss
