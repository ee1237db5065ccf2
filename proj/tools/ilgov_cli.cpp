#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ilgov/errors.hpp"
#include "ilgov/harness.hpp"

namespace {

enum Exit { kOk = 0, kSpec = 2, kIo = 3, kNumeric = 4, kOther = 1 };

struct Overrides {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> controllers;
  std::optional<std::size_t> budget;
  std::optional<double> beta;
  bool no_offline = false;
  bool include_evaluation = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--spec", o.spec, "Experiment spec (JSON); built-in defaults when omitted");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Run directory");
  cmd->add_option("--controllers", o.controllers, "Controllers to run")->delimiter(',');
  cmd->add_option("--budget", o.budget, "Online oracle evaluation budget");
  cmd->add_option("--beta", o.beta, "Objective exponent: cost = P * t^beta");
}

ilgov::ExperimentSpec resolve(const Overrides& o) {
  ilgov::ExperimentSpec s = o.spec.empty() ? ilgov::default_spec() : ilgov::load_spec(o.spec);
  if (o.seed) s.seed = *o.seed;
  if (!o.out.empty()) s.output = o.out;
  if (!o.controllers.empty()) s.controllers = o.controllers;
  if (o.budget) s.budget = *o.budget;
  if (o.beta) s.beta = *o.beta;
  ilgov::validate(s);
  return s;
}

std::string knob_line(const ilgov::KnobScores& s) {
  return fmt::format("{:6.2f} {:6.2f} {:6.2f} {:6.2f}", s[0], s[1], s[2], s[3]);
}

int run(int argc, char** argv) {
  CLI::App app{"Online imitation-learning governor simulator"};
  app.require_subcommand(1);
  Overrides o;

  auto* characterize = app.add_subcommand("characterize", "Sweep every configuration of the training suite");
  add_common(characterize, o);
  characterize->add_flag("--include-evaluation", o.include_evaluation,
                         "Also characterize the evaluation suite");

  auto* train = app.add_subcommand("train-offline", "Fit models and train the offline policy");
  add_common(train, o);
  train->add_flag("--no-offline", o.no_offline, "Emit a randomly initialized policy");

  auto* simulate = app.add_subcommand("simulate", "Run the controllers over the evaluation sequence");
  add_common(simulate, o);
  simulate->add_flag("--no-offline", o.no_offline, "Start online learning from random weights");

  auto* report = app.add_subcommand("report", "Consolidate a run directory into summary.json");
  add_common(report, o);

  auto* show = app.add_subcommand("show-spec", "Print the resolved spec as JSON");
  add_common(show, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kSpec;
  }

  const ilgov::ExperimentSpec spec = resolve(o);
  if (*characterize) {
    for (const auto& p : ilgov::cmd_characterize(spec, o.include_evaluation))
      fmt::print("wrote {}\n", p.string());
  } else if (*train) {
    const auto r = ilgov::cmd_train_offline(spec, o.no_offline);
    fmt::print("model fit: {} samples, power error {:.4f}, time error {:.4f}\n", r.fit_samples,
               r.power_fit_error, r.time_fit_error);
    fmt::print("training accuracy (n_big n_little f_big f_little){}\n",
               r.random_init ? ", random init" : "");
    for (const auto& [name, s] : r.training_accuracy) fmt::print("  {:20s} {}\n", name, knob_line(s));
  } else if (*simulate) {
    const auto r = ilgov::cmd_simulate(spec, o.no_offline);
    fmt::print("{} epochs\n", r.epochs);
    for (const auto& c : r.controllers) {
      double ratio = 0;
      for (const auto& e : r.energy)
        if (e.controller == c.controller) ratio = e.energy_vs_oracle;
      fmt::print("  {:15s} acc {}  energy/oracle {:.4f}  conv {}\n", c.controller,
                 knob_line(c.accuracy.mean), ratio,
                 c.accuracy.convergence ? std::to_string(*c.accuracy.convergence) : "none");
    }
  } else if (*report) {
    fmt::print("wrote {}\n", ilgov::cmd_report(spec.output).string());
  } else if (*show) {
    std::cout << ilgov::spec_to_json(spec);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ilgov::SpecError& e) {
    fmt::print(stderr, "spec error: {}\n", e.what());
    return kSpec;
  } catch (const ilgov::DomainError& e) {
    fmt::print(stderr, "spec error: {}\n", e.what());
    return kSpec;
  } catch (const ilgov::NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kNumeric;
  } catch (const ilgov::Error& e) {
    // IoError, ParseError, FormatError and LookupError all concern artifacts on disk.
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kOther;
  }
}
