#include "evidloss/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evidloss/config.hpp"
#include "evidloss/evaluate.hpp"
#include "evidloss/gradients.hpp"
#include "evidloss/verify.hpp"

namespace evidloss {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// verify ------------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 7;
  std::size_t cases = 0;
  std::size_t mc_samples = 1'000'000;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  verify::Suite suite;
  try {
    suite = verify::parse_suite(a.suite);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  verify::SuiteOptions opts;
  opts.case_count = a.cases;
  opts.mc_samples = a.mc_samples;
  const auto start = std::chrono::steady_clock::now();
  const auto report = verify::run_proposition_suite(suite, a.seed, opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string text = report.to_json().dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  std::cerr << "verify " << a.suite << ": " << report.passes << "/" << report.total
            << " passed, " << report.failures.size() << " failed (" << secs << " s)\n";
  for (const auto& c : report.checks) {
    if (c.passes != c.total) {
      std::cerr << "  FAILED " << c.name << ": " << (c.total - c.passes) << " of " << c.total << "\n";
    }
  }
  return report.ok() ? 0 : 1;
}

// sweep -------------------------------------------------------------------------

struct SweepArgs {
  std::string function;
  std::vector<double> alpha0;
  std::vector<double> gamma;
  std::vector<double> alpha_c{1.0, 2.0, 3.0};
  int pbar_steps = 101;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  if (a.alpha0.empty() || a.gamma.empty()) throw UsageError("sweep: --alpha0 and --gamma must be nonempty");
  std::ostringstream csv;
  csv << "function,x,alpha0,gamma,value\n";
  if (a.function == "f" || a.function == "grad-gap-derivative") {
    if (a.pbar_steps < 2) throw UsageError("sweep: --pbar-steps must be >= 2");
    const bool deriv = a.function != "f";
    for (double a0 : a.alpha0) {
      if (!(a0 > 2.0)) throw UsageError("sweep: alpha0 must exceed 2 for a nonempty p_bar window");
      const double lo = 1.0 / a0, hi = 1.0 - 1.0 / a0;
      for (double g : a.gamma) {
        for (int i = 0; i < a.pbar_steps; ++i) {
          const double p = lo + (hi - lo) * i / (a.pbar_steps - 1);
          const double v = deriv ? gradient_gap_f_derivative(p, a0, g) : gradient_gap_f(p, a0, g);
          csv << a.function << ',' << num(p) << ',' << num(a0) << ',' << num(g) << ',' << num(v) << '\n';
        }
      }
    }
  } else if (a.function == "g") {
    if (a.alpha_c.empty()) throw UsageError("sweep: --alpha-c must be nonempty");
    for (double ac : a.alpha_c) {
      for (double a0 : a.alpha0) {
        if (a0 < ac + 1.0) continue;
        for (double g : a.gamma) {
          csv << "g," << num(ac) << ',' << num(a0) << ',' << num(g) << ','
              << num(beta_ratio_g(a0, ac, g)) << '\n';
        }
      }
    }
  } else {
    throw UsageError("sweep: unknown function '" + a.function + "'");
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out, csv.str());
  }
  return 0;
}

// train / eval --------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out_dir;
};

int cmd_train(const TrainArgs& a) {
  const RunConfig cfg = load_run_config(a.config);
  const fs::path dir = a.out_dir.empty() ? cfg.output_dir : fs::path(a.out_dir);
  fs::create_directories(dir);
  const DatasetSplit split = generate(cfg.data);
  write_csv(split, dir / "data.csv");
  const TrainResult result = train(cfg.train, split);
  result.model.save(dir / "model.json");
  result.history.write_csv(dir / "history.csv");
  const auto report = evaluate(result.model, split.test, default_scorer(cfg.train.loss_kind),
                               cfg.data.n_true_ood > 0);
  write_text(dir / "metrics.json", report.to_json().dump(2) + "\n");
  std::cerr << "train: " << loss_kind_name(cfg.train.loss_kind) << ", final loss "
            << result.history.epochs.back().train_loss << ", artifacts in " << dir.string() << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string scorer;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const MlpModel model = MlpModel::load(a.model);
  const DatasetSplit split = read_csv(a.data);
  Scorer scorer = model.head == HeadKind::kEvidential ? Scorer::kEvidential : Scorer::kEntropy;
  if (!a.scorer.empty()) scorer = *parse_scorer(a.scorer);
  const auto report = evaluate(model, split.test, scorer, false);
  const std::string text = report.to_json().dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Evidential loss toolkit: verification suites, sweeps, training and evaluation"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite and write a JSON report");
  verify_cmd->add_option("--suite", va.suite, "prop1|lower_bounds|gradient_thresholds|g_ratio|psi1_scan|mc_closed_form|finite_diff|all");
  verify_cmd->add_option("--seed", va.seed, "Root seed");
  verify_cmd->add_option("--cases", va.cases, "Cases per battery (0 = suite default)");
  verify_cmd->add_option("--mc-samples", va.mc_samples, "Monte-Carlo draws per configuration")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", va.out, "Report path (stdout if omitted)");

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate f, g or f' on a grid as CSV");
  sweep_cmd->add_option("--function", sa.function, "f|g|grad-gap-derivative")
      ->required()
      ->check(CLI::IsMember({"f", "g", "grad-gap-derivative"}));
  sweep_cmd->add_option("--alpha0", sa.alpha0, "alpha_0 values")->required()->delimiter(',');
  sweep_cmd->add_option("--gamma", sa.gamma, "gamma values")->required()->delimiter(',');
  sweep_cmd->add_option("--alpha-c", sa.alpha_c, "alpha_c values for g")->delimiter(',');
  sweep_cmd->add_option("--pbar-steps", sa.pbar_steps, "Grid points across the p_bar window");
  sweep_cmd->add_option("--out", sa.out, "CSV path (stdout if omitted)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Generate data, train, evaluate and write artifacts");
  train_cmd->add_option("--config", ta.config, "JSON run config")->required();
  train_cmd->add_option("--out-dir", ta.out_dir, "Artifact directory (overrides output_dir)");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on the test rows of a CSV");
  eval_cmd->add_option("--model", ea.model, "Model JSON")->required();
  eval_cmd->add_option("--data", ea.data, "Dataset CSV")->required();
  eval_cmd->add_option("--scorer", ea.scorer, "evidential|energy|entropy")
      ->check(CLI::IsMember({"evidential", "energy", "entropy"}));
  eval_cmd->add_option("--out", ea.out, "Report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify_cmd) return cmd_verify(va);
    if (*sweep_cmd) return cmd_sweep(sa);
    if (*train_cmd) return cmd_train(ta);
    if (*eval_cmd) return cmd_eval(ea);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace evidloss
