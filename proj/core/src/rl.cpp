#include "ilgov/rl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "ilgov/errors.hpp"
#include "ilgov/oracle.hpp"

namespace ilgov {

double reward(double power, double time, const RewardContext& ctx, double beta) {
  if (!(power > 0) || !(time > 0) || !(ctx.p_min > 0) || !(ctx.t_min > 0))
    throw DomainError("reward inputs must be positive");
  return -(power / ctx.p_min) * std::pow(time / ctx.t_min, beta);
}

double q_target_blend(double q, double r, double max_next, double alpha, double gamma) {
  return (1.0 - alpha) * q + alpha * (r + gamma * max_next);
}

double EpsilonSchedule::at(std::size_t epoch) const {
  return std::max(floor, start * std::pow(decay, static_cast<double>(epoch)));
}

std::size_t select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng) {
  if (q.size() == 0) throw DomainError("no actions to select from");
  if (!(epsilon >= 0 && epsilon <= 1)) throw DomainError("epsilon must be in [0,1]");
  if (rng.uniform() < epsilon) return rng.index(static_cast<std::size_t>(q.size()));
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q[i] > q[arg]) arg = i;
  return static_cast<std::size_t>(arg);
}

namespace {

void check_rates(double alpha, double gamma) {
  if (!(alpha >= 0 && alpha <= 1)) throw DomainError("alpha must be in [0,1]");
  if (!(gamma >= 0 && gamma < 1)) throw DomainError("gamma must be in [0,1)");
}

int bin(double v, double lo, double hi, int n) {
  const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
  return std::clamp(b, 0, n - 1);
}

}  // namespace

QTable::QTable(std::size_t actions, StateBins bins) : actions_(actions), bins_(bins) {
  if (actions == 0) throw DomainError("Q-table needs actions");
  if (bins.ipc_bins < 1 || bins.mem_bins < 1 || !(bins.ipc_hi > bins.ipc_lo) ||
      !(bins.mem_hi > bins.mem_lo))
    throw DomainError("invalid state discretization");
  table = Eigen::MatrixXd::Zero(bins.ipc_bins * bins.mem_bins, static_cast<Eigen::Index>(actions));
}

std::size_t QTable::state_index(const CounterVector& h) const {
  if (!(h.instructions > 0) || !(h.cycles > 0)) throw NumericError("invalid counters");
  const int i = bin(h.instructions / h.cycles, bins_.ipc_lo, bins_.ipc_hi, bins_.ipc_bins);
  const int m = bin(h.dmem_access / h.instructions, bins_.mem_lo, bins_.mem_hi, bins_.mem_bins);
  return static_cast<std::size_t>(i * bins_.mem_bins + m);
}

Eigen::VectorXd QTable::q_values(const CounterVector& state) const {
  return table.row(static_cast<Eigen::Index>(state_index(state))).transpose();
}

void QTable::update(const CounterVector& state, std::size_t action, double r,
                    const CounterVector* next, double alpha, double gamma) {
  check_rates(alpha, gamma);
  if (action >= actions_) throw DomainError("action out of range");
  const double max_next = next ? q_values(*next).maxCoeff() : 0.0;
  double& q = table(static_cast<Eigen::Index>(state_index(state)), static_cast<Eigen::Index>(action));
  q = q_target_blend(q, r, max_next, alpha, gamma);
}

std::string QTable::state_repr(const CounterVector& state) const {
  return "s" + std::to_string(state_index(state));
}

DqnLearner::DqnLearner(std::size_t actions, FeatureScaler scaler, std::uint64_t seed, int hidden,
                       int layers, double learning_rate)
    : scaler_(std::move(scaler)),
      net_([&] {
        Rng rng(hash_combine(seed, 0xd9au));
        return Mlp(kPolicyFeatures, std::vector<int>(static_cast<std::size_t>(layers), hidden),
                   static_cast<int>(actions), rng);
      }()),
      adam_(net_, learning_rate) {}

Eigen::VectorXd DqnLearner::q_values(const CounterVector& state) const {
  return net_.forward(scaler_.apply(raw_policy_features(state))).col(0);
}

double DqnLearner::loss_and_gradient(const Eigen::VectorXd& x, std::size_t action, double target,
                                     MlpGradients* grad) const {
  Mlp::Cache cache;
  const Eigen::MatrixXd q = net_.forward(x, cache);
  const auto a = static_cast<Eigen::Index>(action);
  const double err = q(a, 0) - target;
  if (grad) {
    Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(q.rows(), 1);
    dout(a, 0) = err;
    *grad = net_.backward(cache, dout);
  }
  return 0.5 * err * err;
}

void DqnLearner::update(const CounterVector& state, std::size_t action, double r,
                        const CounterVector* next, double alpha, double gamma) {
  check_rates(alpha, gamma);
  if (action >= actions()) throw DomainError("action out of range");
  const Eigen::VectorXd x = scaler_.apply(raw_policy_features(state));
  const double q = net_.forward(x)(static_cast<Eigen::Index>(action), 0);
  const double max_next = next ? q_values(*next).maxCoeff() : 0.0;
  const double target = q_target_blend(q, r, max_next, alpha, gamma);
  MlpGradients g;
  loss_and_gradient(x, action, target, &g);
  adam_.step(net_, g);
}

std::string DqnLearner::state_repr(const CounterVector& h) const {
  return fmt::format("ipc={:.4f};mem={:.4f}", h.instructions / h.cycles,
                     h.dmem_access / h.instructions);
}

RlRun run_rl_control(const Stream& stream, const ConfigSpace& space, QLearner& learner,
                     const RlOptions& opts) {
  if (learner.actions() != space.size()) throw DomainError("learner action count != space size");
  RlRun run;
  run.decisions.controller = std::string("rl-") + std::string(learner.variant());
  Rng rng(hash_combine(opts.seed, 0x51u));
  const Configuration low = space.min_config();
  const Configuration high = space.max_config();

  Configuration prev = low;
  CounterVector pending_state;
  std::size_t pending_action = 0;
  double pending_reward = 0;
  bool pending = false;

  for (std::size_t k = 0; k < stream.size(); ++k) {
    const CounterVector state = stream.execute(k, prev).counters;
    if (pending) learner.update(pending_state, pending_action, pending_reward, &state, opts.alpha, opts.gamma);

    const double eps = opts.epsilon.at(k);
    const std::size_t a = select_action(learner.q_values(state), eps, rng);
    const Configuration c = space.at(a);
    const EpochObservation obs = stream.execute(k, c);

    // Reward normalization points, queried from the plant and logged.
    const RewardContext ctx{stream.execute(k, low).power, stream.execute(k, high).exec_time};
    const double r = reward(obs.power, obs.exec_time, ctx, opts.beta);

    run.log.push_back({k, learner.state_repr(state), a, r, eps, ctx});
    run.decisions.rows.push_back({k, stream.workload(k).name, c, obs.power, obs.exec_time,
                                  obs.energy(), 0, 0, false});
    pending_state = state;
    pending_action = a;
    pending_reward = r;
    pending = true;
    prev = c;
  }
  if (pending)
    learner.update(pending_state, pending_action, pending_reward, nullptr, opts.alpha, opts.gamma);
  return run;
}

void save_rl_log(const std::vector<RlLogRow>& rows, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "epoch_id,state_repr,action_index,reward,epsilon\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{}\n", r.epoch_id, r.state_repr, r.action, r.reward, r.epsilon);
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace ilgov
