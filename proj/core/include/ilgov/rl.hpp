#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ilgov/config_space.hpp"
#include "ilgov/decision_log.hpp"
#include "ilgov/mlp.hpp"
#include "ilgov/policy.hpp"
#include "ilgov/rng.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

// Normalizers of the reward: power at the powersave configuration and time at
// the performance configuration, both for the current epoch.
struct RewardContext {
  double p_min = 1;
  double t_min = 1;
};

// R = -(P t^beta) / (P_min t_min^beta)
double reward(double power, double time, const RewardContext& ctx, double beta);

// (1 - alpha) q + alpha (r + gamma max_next)
double q_target_blend(double q, double r, double max_next, double alpha, double gamma);

struct EpsilonSchedule {
  double start = 0.1;
  double decay = 0.995;
  double floor = 0.01;
  double at(std::size_t epoch) const;
};

// Uniform action with probability epsilon, otherwise argmax (ties to the lowest index).
std::size_t select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng);

class QLearner {
 public:
  virtual ~QLearner() = default;
  virtual std::string_view variant() const = 0;
  virtual std::size_t actions() const = 0;
  virtual Eigen::VectorXd q_values(const CounterVector& state) const = 0;
  // Q(s,a) blended toward r + gamma max Q(next); next == nullptr marks a terminal transition.
  virtual void update(const CounterVector& state, std::size_t action, double r,
                      const CounterVector* next, double alpha, double gamma) = 0;
  virtual std::string state_repr(const CounterVector& state) const = 0;
};

struct StateBins {
  double ipc_lo = 0.3, ipc_hi = 1.2;
  double mem_lo = 0.03, mem_hi = 0.4;  // data memory accesses per instruction
  int ipc_bins = 8;
  int mem_bins = 8;
};

class QTable final : public QLearner {
 public:
  QTable(std::size_t actions, StateBins bins = {});
  std::string_view variant() const override { return "table"; }
  std::size_t actions() const override { return actions_; }
  std::size_t state_index(const CounterVector& h) const;
  Eigen::VectorXd q_values(const CounterVector& state) const override;
  void update(const CounterVector& state, std::size_t action, double r, const CounterVector* next,
              double alpha, double gamma) override;
  std::string state_repr(const CounterVector& state) const override;

  Eigen::MatrixXd table;  // states x actions

 private:
  std::size_t actions_;
  StateBins bins_;
};

// Function approximation: counters -> one Q-value per configuration. Online
// updates with no replay memory and no target network.
class DqnLearner final : public QLearner {
 public:
  DqnLearner(std::size_t actions, FeatureScaler scaler, std::uint64_t seed, int hidden = 20,
             int layers = 2, double learning_rate = 1e-3);
  std::string_view variant() const override { return "dqn"; }
  std::size_t actions() const override { return static_cast<std::size_t>(net_.outputs()); }
  Eigen::VectorXd q_values(const CounterVector& state) const override;
  void update(const CounterVector& state, std::size_t action, double r, const CounterVector* next,
              double alpha, double gamma) override;
  std::string state_repr(const CounterVector& state) const override;

  // Loss 0.5 (Q(s,a) - y)^2 and its parameter gradient, for verification.
  double loss_and_gradient(const Eigen::VectorXd& features, std::size_t action, double target,
                           MlpGradients* grad) const;

  const Mlp& network() const { return net_; }
  Mlp& network() { return net_; }
  const FeatureScaler& scaler() const { return scaler_; }

 private:
  FeatureScaler scaler_;
  Mlp net_;
  Adam adam_;
};

struct RlOptions {
  double alpha = 0.1;
  double gamma = 0.9;
  double beta = 1.0;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 1;
};

struct RlLogRow {
  std::size_t epoch_id;
  std::string state_repr;
  std::size_t action;
  double reward;
  double epsilon;
  RewardContext context;
};

struct RlRun {
  DecisionLog decisions;
  std::vector<RlLogRow> log;
};

// Per epoch: observe the state, choose a configuration, execute it, score it with the
// reward and apply the update once the next state is known.
RlRun run_rl_control(const Stream& stream, const ConfigSpace& space, QLearner& learner,
                     const RlOptions& opts);

// CSV: epoch_id,state_repr,action_index,reward,epsilon
void save_rl_log(const std::vector<RlLogRow>& rows, const std::filesystem::path& path);

}  // namespace ilgov
