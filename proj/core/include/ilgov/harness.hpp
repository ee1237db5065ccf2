#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ilgov/config_space.hpp"
#include "ilgov/metrics.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

inline constexpr int kSpecSchemaVersion = 1;

struct WorkloadSpec {
  std::string name;
  Profile profile = Profile::mixed;
  std::uint64_t seed = 0;
  std::size_t epochs = 200;
};

struct SequenceSpec {
  std::vector<std::string> order;  // evaluation workload names; empty = suite order
  std::size_t repetitions = 16;
  std::size_t segment = 10;        // epochs per visit, 0 = whole workload
  bool shuffle = false;            // permute the order independently per repetition
};

struct OfflineSpec {
  double learning_rate = 1e-3;
  std::size_t batch = 150;
  int epochs = 500;
  int aggregation_rounds = 1;
  int hidden = 20;
  int layers = 2;
  std::size_t characterization_stride = 10;  // every n-th epoch feeds the model fit
};

struct OnlineSpec {
  double learning_rate = 1e-3;
  std::size_t batch = 20;
  int epochs = 20;
  double forgetting = 0.99;
  double p0 = 1e3;
  double trace_cap = 5.0;
};

struct RlSpec {
  std::string variant = "dqn";  // "dqn" or "table"
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  double epsilon_decay = 0.995;
  double epsilon_floor = 0.01;
  double learning_rate = 1e-3;
};

struct ExperimentSpec {
  int schema_version = kSpecSchemaVersion;
  std::uint64_t seed = 1;
  double beta = 1.0;
  std::size_t budget = 40;
  std::size_t buffer_capacity = 100;
  std::size_t accuracy_window = 20;
  double accuracy_threshold = 99.0;
  double min_margin = 0.004;
  double label_radius = 0.05;
  std::vector<WorkloadSpec> training;
  std::vector<WorkloadSpec> evaluation;
  std::vector<std::string> controllers;
  SequenceSpec sequence;
  OfflineSpec offline;
  OnlineSpec online;
  RlSpec rl;
  std::filesystem::path output = "run";

  GeneratorOptions generator() const;
};

// Controllers the simulator knows, in output order.
const std::vector<std::string>& known_controllers();

// Defaults for a desk-scale reproduction: five training and seven evaluation workloads.
ExperimentSpec default_spec();

// JSON text. Unknown keys, missing suites, duplicate names, unknown controllers
// and out-of-range values raise SpecError.
ExperimentSpec parse_spec(std::string_view json_text);
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string spec_to_json(const ExperimentSpec& spec);
void validate(const ExperimentSpec& spec);

std::vector<Workload> build_suite(const std::vector<WorkloadSpec>& specs,
                                  const GeneratorOptions& opts);

// Workload names in stream order, one entry per visit, as recorded in sequence.json.
std::vector<std::string> materialize_sequence(const ExperimentSpec& spec);

// Run directory layout.
struct RunPaths {
  std::filesystem::path root;
  std::filesystem::path traces() const { return root / "traces"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path plots() const { return root / "plots"; }
  std::filesystem::path policy_checkpoint() const { return checkpoints() / "policy.ckpt"; }
  std::filesystem::path models_checkpoint() const { return checkpoints() / "models.ckpt"; }
};

// Writes one full-sweep trace per training workload (and per evaluation workload
// when asked). Returns the files written.
std::vector<std::filesystem::path> cmd_characterize(const ExperimentSpec& spec,
                                                    bool include_evaluation = false);

struct OfflineSummary {
  std::map<std::string, KnobScores> training_accuracy;
  double power_fit_error = 0;
  double time_fit_error = 0;
  std::size_t fit_samples = 0;
  std::size_t dataset = 0;
  bool random_init = false;
};

// Loads the training traces, fits the models, trains the policy and writes both
// checkpoints plus reports/offline.json. With no_offline the policy checkpoint
// holds randomly initialized networks.
OfflineSummary cmd_train_offline(const ExperimentSpec& spec, bool no_offline = false);

struct ControllerResult {
  std::string controller;
  AccuracyReport accuracy;
  Totals totals;
  std::size_t retrains = 0;
  std::size_t oracle_evaluations = 0;
  std::size_t model_updates = 0;
};

struct SimulationSummary {
  std::size_t epochs = 0;
  std::vector<ControllerResult> controllers;
  std::vector<EnergyRow> energy;
  std::optional<std::size_t> il_convergence;
  std::size_t il_disagreements = 0;
  // Training-suite accuracy of the final online policy.
  std::map<std::string, KnobScores> training_accuracy_after;

  const ControllerResult* find(std::string_view name) const;
};

// Runs every configured controller over the evaluation sequence and writes decision
// logs, accuracy and energy reports and plot CSVs. With no_offline the online-IL
// controller starts from random weights and untrained models, and no checkpoints
// are read.
SimulationSummary cmd_simulate(const ExperimentSpec& spec, bool no_offline = false);

// Consolidates a finished run directory into summary.json at its root and returns
// the path. Missing artifacts raise IoError naming every one of them.
std::filesystem::path cmd_report(const std::filesystem::path& run_dir);

}  // namespace ilgov
