#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evidloss/dirichlet.hpp"

namespace evidloss::verify {

struct McEstimate {
  double mean = 0.0;
  double sem = 0.0;
  std::size_t samples = 0;
};

/// Running mean / standard error (Welford).
class MeanAccumulator {
 public:
  void add(double x);
  McEstimate estimate() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Sample mean and SEM of (1 - p_c*)^gamma (-ln p_c*) over Dirichlet draws.
McEstimate mc_expected_focal(const DirichletParams& alpha, std::size_t c_star, double gamma,
                             std::size_t n_samples, std::uint64_t seed);

/// Generic Monte-Carlo mean of fn(p) for p ~ Dir(alpha).
McEstimate mc_expectation(const DirichletParams& alpha,
                          const std::function<double(std::span<const double>)>& fn,
                          std::size_t n_samples, std::uint64_t seed);

/// Central differences of `loss` around `alpha`, one component at a time.
/// Throws InvalidParameters if alpha_k - step leaves the alpha >= 1 domain.
std::vector<double> finite_diff_gradient(
    const std::function<double(const DirichletParams&)>& loss, const DirichletParams& alpha,
    double step);

/// |a - b| / max(|a|, |b|), with a tiny floor so that two exact zeros compare equal.
double relative_error(double a, double b);

// Reporting -------------------------------------------------------------------

struct Failure {
  std::string check;
  nlohmann::json inputs;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
};

struct CheckSummary {
  std::string name;
  std::size_t total = 0;
  std::size_t passes = 0;
};

struct VerificationReport {
  std::string suite;
  std::uint64_t root_seed = 0;
  std::size_t total = 0;
  std::size_t passes = 0;
  std::vector<Failure> failures;
  std::vector<CheckSummary> checks;
  /// Informational results that are reported but never gate the suite.
  nlohmann::json observations = nlohmann::json::object();
  /// Kept out of to_json() so that reports are byte-reproducible.
  double wall_time_seconds = 0.0;

  bool ok() const { return failures.empty(); }
  /// Records one case. `passed` decides; the numbers are only kept on failure.
  void record(const std::string& check, bool passed, nlohmann::json inputs, double expected,
              double actual, double tolerance);
  void merge(const VerificationReport& other);
  nlohmann::json to_json() const;
};

// Suites ----------------------------------------------------------------------

enum class Suite {
  kProp1,
  kLowerBounds,
  kGradientThresholds,
  kGRatio,
  kPsi1Scan,
  kMcClosedForm,
  kFiniteDiff,
  kAll,
};

/// Throws std::invalid_argument for unknown names.
Suite parse_suite(const std::string& name);
std::string suite_name(Suite suite);

using UfceClosedForm = std::function<double(const DirichletParams&, std::size_t, double)>;

struct SuiteOptions {
  /// 0 selects each suite's default (1000 cases, 100 for mc_closed_form).
  std::size_t case_count = 0;
  std::size_t mc_samples = 1'000'000;
  /// 0 means "hardware concurrency" (after applying EVIDLOSS_THREADS).
  unsigned threads = 0;
  /// Replaces the UFCE closed form under test in mc_closed_form (mutation testing).
  UfceClosedForm ufce_closed_form;
};

VerificationReport run_proposition_suite(Suite which, std::uint64_t seed,
                                         const SuiteOptions& options = {});

/// Random configuration used by the Monte-Carlo battery.
struct McConfig {
  DirichletParams alpha;
  std::size_t c_star;
  double gamma;
};

/// Closed forms vs Monte-Carlo (ufce, uce, dirichlet_entropy, expected_p_log_p),
/// one shared set of draws per configuration, 4 SEM acceptance band.
VerificationReport run_mc_battery(std::span<const McConfig> configs, std::size_t n_samples,
                                  std::uint64_t seed, const SuiteOptions& options = {});

/// Number of worker threads: EVIDLOSS_THREADS if set, else hardware concurrency.
unsigned default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// alpha_k = 1 + Exponential(mean 5), capped at 200.
DirichletParams random_alpha(Rng& rng, std::size_t classes);

}  // namespace evidloss::verify
