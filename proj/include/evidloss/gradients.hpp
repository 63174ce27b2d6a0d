#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evidloss/dirichlet.hpp"

namespace evidloss {

// Analytic derivatives with respect to the concentration vector. Moving
// alpha_j also moves alpha_0, so every component is a total derivative.

std::vector<double> uce_grad_alpha(const DirichletParams& alpha, std::size_t c_star);
std::vector<double> ufce_grad_alpha(const DirichletParams& alpha, std::size_t c_star,
                                    double gamma);
/// d/d alpha of KL(Dir(alpha) || Dir(1)); shared by the ENT and ER terms.
std::vector<double> kl_to_flat_grad_alpha(const DirichletParams& alpha);

// Deterministic baselines, gradients with respect to the logits.

std::vector<double> cross_entropy_grad_logits(std::span<const double> logits, std::size_t c_star);
/// Probabilities below `floor` are clamped before evaluating the focal term.
std::vector<double> focal_grad_logits(std::span<const double> logits, std::size_t c_star,
                                      double gamma, double floor = 1e-12);
std::vector<double> energy_grad_logits(std::span<const double> logits, double temperature);

/// Feasible p_bar window for a given alpha_0: (1/alpha_0, 1 - 1/alpha_0).
struct GradGapPoint {
  double p_bar;
  double alpha0;
  double gamma;
  double value;
};

/// |dUFCE/d alpha_c*| - |dUCE/d alpha_c*| written in terms of p_bar = alpha_c* / alpha_0
/// at fixed alpha_0. Positive means UFCE pushes the true-class evidence harder.
double gradient_gap_f(double p_bar, double alpha0, double gamma);
/// d f / d p_bar at fixed alpha_0.
double gradient_gap_f_derivative(double p_bar, double alpha0, double gamma);

GradGapPoint evaluate_gradient_gap(double p_bar, double alpha0, double gamma);

/// G(a0) G(a0 - ac + g) / (G(a0 + g) G(a0 - ac)) = B(a0, g) / B(a0 - ac, g).
double beta_ratio_g(double alpha0, double alpha_c, double gamma);

struct CrossingThresholds {
  double tau1 = 0.0;
  double tau2 = 0.0;
  /// Scanned feasible window in p_bar.
  double window_lo = 0.0;
  double window_hi = 0.0;
  /// Set when f never changes sign inside the window; tau1/tau2 then hold
  /// the window endpoints.
  bool no_sign_change = false;
};

/// Sweeps p_bar at fixed alpha_c* (alpha_0 = alpha_c* / p_bar) on a 1e-4 grid,
/// then bisects each bracketing interval to 1e-8.
CrossingThresholds find_crossing_thresholds(double alpha_c_star, double gamma, int classes);

}  // namespace evidloss
