#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <vector>

#include "ilgov/config_space.hpp"
#include "ilgov/mlp.hpp"
#include "ilgov/oracle.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

inline constexpr int kPolicyFeatures = 17;

// 12 counters (instructions, cycles, branch misses, L2 misses, data memory accesses,
// non-cache requests, little utilization, four big utilizations, power) followed by
// instructions/cycle and branch, L2, memory-access and non-cache rates per instruction.
Eigen::VectorXd raw_policy_features(const CounterVector& h);

// Per-feature z-score statistics. Either fit once or accumulated online until frozen.
struct FeatureScaler {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kPolicyFeatures);
  Eigen::VectorXd stddev = Eigen::VectorXd::Ones(kPolicyFeatures);
  bool frozen = false;
  std::size_t count = 0;
  std::size_t freeze_after = 20;

  void fit(const std::vector<Eigen::VectorXd>& raw);
  void observe(const Eigen::VectorXd& raw);
  Eigen::VectorXd apply(const Eigen::VectorXd& raw) const;

 private:
  Eigen::VectorXd m2_ = Eigen::VectorXd::Zero(kPolicyFeatures);
};

using KnobLevels = std::array<int, 4>;

struct Example {
  Eigen::VectorXd raw;  // raw_policy_features of the state
  KnobLevels label;     // oracle level index per knob
};

struct TrainOptions {
  double learning_rate = 1e-3;
  std::size_t batch = 150;
  int epochs = 500;
  std::uint64_t seed = 1;
};

// Four independent classifiers, one per knob, over shared normalized features.
class PolicyBundle {
 public:
  PolicyBundle() = default;
  PolicyBundle(const ConfigSpace& space, std::uint64_t seed, int hidden = 20, int layers = 2);

  Eigen::VectorXd featurize(const CounterVector& h) const;
  Eigen::VectorXd normalize(const Eigen::VectorXd& raw) const { return scaler.apply(raw); }

  std::array<Eigen::VectorXd, 4> probabilities(const Eigen::VectorXd& features) const;
  KnobLevels predict_levels(const Eigen::VectorXd& features) const;
  KnobLevels predict_levels(const CounterVector& h) const;
  Configuration predict(const CounterVector& h, const ConfigSpace& space) const;

  // Trains every head on the examples with cross-entropy, Adam and minibatches.
  // Fresh optimizer state per call.
  void train(const std::vector<Example>& data, const TrainOptions& opts);

  // Fraction of examples whose four labels are all reproduced.
  double exact_match(const std::vector<Example>& data) const;

  void zero_output_layers();

  void save(const std::filesystem::path& path) const;
  static PolicyBundle load(const std::filesystem::path& path);

  FeatureScaler scaler;
  std::array<Mlp, 4> heads;
};

// Fixed-capacity store of supervision pairs collected on disagreement.
class TrainingBuffer {
 public:
  explicit TrainingBuffer(std::size_t capacity = 100) : capacity_(capacity) {}
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool full() const { return entries_.size() >= capacity_; }
  const std::vector<Example>& entries() const { return entries_; }
  void push(Example e);
  void clear() { entries_.clear(); }

 private:
  std::size_t capacity_;
  std::vector<Example> entries_;
};

// Appends (state, oracle levels) when the policy disagrees with the oracle in any knob.
// Returns true when an entry was added.
bool observe_and_maybe_buffer(const PolicyBundle& bundle, TrainingBuffer& buffer,
                              const CounterVector& state, const Configuration& oracle,
                              const ConfigSpace& space);

struct OnlineTrainOptions {
  double learning_rate = 1e-3;
  std::size_t batch = 20;
  int epochs = 20;
};

// Backpropagation on the buffer contents only; returns the new bundle and clears the buffer.
PolicyBundle retrain_online(const PolicyBundle& bundle, TrainingBuffer& buffer,
                            const OnlineTrainOptions& opts, std::uint64_t seed);

struct OfflineIlOptions {
  TrainOptions train;
  int aggregation_rounds = 1;
  int hidden = 20;
  int layers = 2;
  double beta = 1.0;
};

struct OfflineIlResult {
  PolicyBundle bundle;
  std::vector<Example> dataset;     // aggregated supervision
  std::size_t exact_examples = 0;   // from the oracle rollout
};

// Exact imitation on oracle rollouts, then DAgger rounds on policy rollouts.
// Each rollout starts at the minimum configuration.
OfflineIlResult train_offline(const std::vector<const Workload*>& suite, const ConfigSpace& space,
                              const OfflineIlOptions& opts);

// Supervised pairs along a rollout. With `policy` null the oracle drives the rollout.
std::vector<Example> rollout_examples(const Workload& w, const std::vector<OracleLabel>& labels,
                                      const ConfigSpace& space, const PolicyBundle* policy);

}  // namespace ilgov
