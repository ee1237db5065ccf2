#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>

#include "ilgov/errors.hpp"
#include "ilgov/oracle.hpp"
#include "ilgov/rl.hpp"
#include "support.hpp"

using namespace ilgov;

namespace {

// Stationary plant: every epoch behaves the same, energy set per configuration.
class BanditPlant final : public Plant {
 public:
  explicit BanditPlant(std::function<double(const Configuration&)> power) : power_(std::move(power)) {}
  EpochObservation execute(const Epoch& e, const Configuration& c) const override {
    EpochObservation o;
    o.epoch_id = e.id;
    o.config = c;
    o.power = power_(c);
    o.exec_time = 0.1;
    o.counters.instructions = 1e7;
    o.counters.cycles = 1.2e7;
    o.counters.dmem_access = 1e6;
    o.counters.power = o.power;
    return o;
  }

 private:
  std::function<double(const Configuration&)> power_;
};

FeatureScaler fitted_scaler() {
  const Workload w = generate_workload("mixed", 30, 12);
  std::vector<Eigen::VectorXd> raw;
  for (std::size_t k = 0; k < w.epochs.size(); ++k)
    raw.push_back(raw_policy_features(w.execute(k, {2, 2, 1000, 1000}).counters));
  FeatureScaler s;
  s.fit(raw);
  return s;
}

}  // namespace

TEST_CASE("reward closed forms") {
  const RewardContext ctx{2.0, 0.4};
  CHECK(reward(2.0, 0.4, ctx, 1.0) == -1.0);
  CHECK(reward(2.0, 0.4, ctx, 0.0) == -1.0);
  CHECK(reward(2.0, 0.4, ctx, 2.5) == -1.0);
  CHECK(std::abs(reward(4.0, 0.6, ctx, 1.0) - (-3.0)) < 1e-12);
  // beta zero ignores time.
  CHECK(reward(3.0, 10.0, ctx, 0.0) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(reward(3.0, 0.01, ctx, 0.0) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("reward is invariant to common rescaling") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double p = rng.uniform(0.5, 5), t = rng.uniform(0.01, 1);
    const RewardContext ctx{rng.uniform(0.5, 2), rng.uniform(0.01, 0.2)};
    const double s = rng.uniform(0.1, 10);
    const double r = reward(p, t, ctx, 1.0);
    CHECK(reward(s * p, t, {s * ctx.p_min, ctx.t_min}, 1.0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(reward(p, s * t, {ctx.p_min, s * ctx.t_min}, 1.0) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("reward rejects non-positive inputs") {
  CHECK_THROWS_AS(reward(0.0, 1.0, {1, 1}, 1.0), DomainError);
  CHECK_THROWS_AS(reward(1.0, -1.0, {1, 1}, 1.0), DomainError);
  CHECK_THROWS_AS(reward(1.0, 1.0, {0, 1}, 1.0), DomainError);
  CHECK_THROWS_AS(reward(1.0, 1.0, {1, std::nan("")}, 1.0), DomainError);
}

TEST_CASE("Q update closed forms") {
  CHECK(std::abs(q_target_blend(1.0, -2.0, 1.0, 0.5, 0.9) - (-0.05)) < 1e-12);
  CHECK(q_target_blend(0.7, -3.0, 5.0, 0.0, 0.9) == 0.7);
  CHECK(q_target_blend(0.7, -3.0, 5.0, 1.0, 0.0) == -3.0);
}

TEST_CASE("table update follows the blend exactly") {
  const Workload w = generate_workload("parallel", 3, 4);
  const CounterVector s = w.execute(0, {1, 1, 600, 600}).counters;
  const CounterVector n = w.execute(1, {4, 4, 2000, 1400}).counters;
  QTable q(640);
  q.table.setConstant(0.25);
  const auto si = static_cast<Eigen::Index>(q.state_index(s));
  const auto ni = static_cast<Eigen::Index>(q.state_index(n));
  q.table(ni, 17) = 2.0;

  SUBCASE("alpha zero leaves Q unchanged") {
    const Eigen::MatrixXd before = q.table;
    q.update(s, 9, -4.0, &n, 0.0, 0.9);
    CHECK(q.table == before);
  }
  SUBCASE("alpha one and gamma zero store the reward") {
    q.update(s, 9, -4.0, &n, 1.0, 0.0);
    CHECK(q.table(si, 9) == -4.0);
  }
  SUBCASE("general step") {
    const double expect = (1 - 0.3) * q.table(si, 9) + 0.3 * (-1.5 + 0.8 * q.table.row(ni).maxCoeff());
    q.update(s, 9, -1.5, &n, 0.3, 0.8);
    CHECK(q.table(si, 9) == expect);
  }
  SUBCASE("terminal transitions bootstrap from zero") {
    q.update(s, 9, -1.5, nullptr, 0.5, 0.9);
    CHECK(q.table(si, 9) == 0.5 * 0.25 + 0.5 * -1.5);
  }
  SUBCASE("rate and action domain") {
    CHECK_THROWS_AS(q.update(s, 9, -1, &n, 1.5, 0.9), DomainError);
    CHECK_THROWS_AS(q.update(s, 9, -1, &n, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(q.update(s, 640, -1, &n, 0.5, 0.9), DomainError);
  }
}

TEST_CASE("table states bin ipc and memory intensity") {
  QTable q(4);
  CHECK(q.table.rows() == 64);
  CounterVector h;
  h.instructions = 1e7;
  h.cycles = 1e7 / 0.3;
  h.dmem_access = 0.03e7;
  CHECK(q.state_index(h) == 0);
  h.cycles = 1e7 / 5.0;  // above range clamps to the last bin
  h.dmem_access = 0.9e7;
  CHECK(q.state_index(h) == 63);
  CHECK(q.state_repr(h) == "s63");
  CHECK_THROWS_AS(q.state_index(CounterVector{}), NumericError);
}

TEST_CASE("epsilon schedule decays to its floor") {
  const EpsilonSchedule e;
  CHECK(e.at(0) == 0.1);
  CHECK(e.at(1) == doctest::Approx(0.0995));
  CHECK(e.at(100) == doctest::Approx(0.1 * std::pow(0.995, 100)));
  CHECK(e.at(10000) == 0.01);
  for (std::size_t k = 0; k < 2000; ++k) CHECK(e.at(k + 1) <= e.at(k));
}

TEST_CASE("greedy selection and its invariances") {
  Rng rng(1);
  Eigen::VectorXd q(6);
  q << 0.1, 0.9, -2, 0.9, 0.3, 0.0;
  CHECK(select_action(q, 0.0, rng) == 1);  // ties to the lower index
  const Eigen::VectorXd shifted = (q.array() + 42.0).matrix();
  CHECK(select_action(shifted, 0.0, rng) == 1);
  CHECK_THROWS_AS(select_action(q, 1.5, rng), DomainError);
  CHECK_THROWS_AS(select_action(Eigen::VectorXd(), 0.0, rng), DomainError);
}

TEST_CASE("full exploration is uniform over 640 actions") {
  Rng rng(2024);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(640, 0, 1);
  std::vector<int> counts(640, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[select_action(q, 1.0, rng)];
  const double expected = draws / 640.0;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 0.1% and 99.9% quantiles of chi-square with 639 degrees of freedom.
  CHECK(chi2 > 534.2);
  CHECK(chi2 < 755.2);
}

TEST_CASE("a fixed seed reproduces the action sequence") {
  const Eigen::VectorXd q = Eigen::VectorXd::Zero(640);
  Rng a(7), b(7);
  for (int i = 0; i < 500; ++i) CHECK(select_action(q, 0.3, a) == select_action(q, 0.3, b));
}

TEST_CASE("a one percent floor still explores within a thousand draws") {
  Rng rng(99);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(640);
  q[3] = 1;
  int explored = 0;
  for (int i = 0; i < 1000; ++i) explored += select_action(q, 0.01, rng) != 3;
  CHECK(explored >= 1);
}

TEST_CASE("function-approximation gradient matches central differences") {
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    CAPTURE(inst);
    DqnLearner dqn(640, FeatureScaler{}, 50 + inst);
    Rng rng(400 + inst);
    Eigen::VectorXd x(kPolicyFeatures);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-2, 2);
    const std::size_t action = rng.index(640);
    const double target = rng.uniform(-3, 0);

    MlpGradients g;
    dqn.loss_and_gradient(x, action, target, &g);
    const Eigen::VectorXd analytic = Mlp::flatten(g);
    Mlp& net = dqn.network();
    const Eigen::VectorXd p0 = net.flat_parameters();
    Eigen::VectorXd numeric(p0.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
      Eigen::VectorXd p = p0;
      p[i] += h;
      net.set_flat_parameters(p);
      const double up = dqn.loss_and_gradient(x, action, target, nullptr);
      p[i] -= 2 * h;
      net.set_flat_parameters(p);
      const double down = dqn.loss_and_gradient(x, action, target, nullptr);
      numeric[i] = (up - down) / (2 * h);
    }
    net.set_flat_parameters(p0);
    const double scale = std::max(analytic.norm(), numeric.norm());
    CHECK((analytic - numeric).norm() / scale < 1e-4);
  }
}

TEST_CASE("a function-approximation update moves Q toward the target") {
  const FeatureScaler scaler = fitted_scaler();
  DqnLearner dqn(640, scaler, 3);
  const Workload w = generate_workload("mixed", 2, 12);
  const CounterVector s = w.execute(0, {2, 2, 1000, 1000}).counters;
  const CounterVector n = w.execute(1, {2, 2, 1000, 1000}).counters;
  const double before = dqn.q_values(s)[100];
  const double target = q_target_blend(before, -5.0, dqn.q_values(n).maxCoeff(), 0.1, 0.9);
  dqn.update(s, 100, -5.0, &n, 0.1, 0.9);
  CHECK(std::abs(dqn.q_values(s)[100] - target) < std::abs(before - target));
  CHECK(dqn.actions() == 640);
  CHECK(dqn.variant() == "dqn");
  CHECK_THROWS_AS(dqn.update(s, 640, -1, &n, 0.1, 0.9), DomainError);
}

TEST_CASE("table Q-learning finds the better of two configurations") {
  const ConfigSpace space(ConfigSpace::Levels{{{1}, {1}, {600, 800}, {600}}});
  REQUIRE(space.size() == 2);
  const Configuration best{1, 1, 800, 600};
  auto plant = std::make_shared<BanditPlant>([&](const Configuration& c) { return c == best ? 1.0 : 1.3; });
  Workload w{"bandit", {}, plant};
  for (std::size_t k = 0; k < 600; ++k) w.epochs.push_back(Epoch{k, 1e7});
  const Stream stream = Stream::of(w);

  // Exhaustive evaluation identifies the best arm.
  const auto labels = offline_oracle(w, space, 1.0);
  REQUIRE(labels[0].config == best);

  QTable q(space.size());
  RlOptions opts;
  const RlRun run = run_rl_control(stream, space, q, opts);
  CHECK(run.decisions.rows.size() == stream.size());
  CHECK(run.log.size() == stream.size());
  Rng rng(0);
  const auto greedy = select_action(q.q_values(stream.execute(0, best).counters), 0.0, rng);
  CHECK(space.at(greedy) == best);
  std::size_t late_best = 0;
  for (std::size_t k = 500; k < 600; ++k) late_best += run.decisions.rows[k].config == best;
  CHECK(late_best >= 95);
}

TEST_CASE("rl control logs every epoch with its reward context") {
  const ConfigSpace space;
  const Workload a = generate_workload("compute-bound", 30, 61);
  const Workload b = generate_workload("memory-bound", 30, 62);
  const Stream stream = Stream::sequence({&a, &b}, 1, 0);
  DqnLearner dqn(space.size(), fitted_scaler(), 8);
  RlOptions opts;
  const RlRun run = run_rl_control(stream, space, dqn, opts);
  REQUIRE(run.decisions.rows.size() == stream.size());
  REQUIRE(run.log.size() == stream.size());
  CHECK(run.decisions.controller == "rl-dqn");
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto& row = run.log[k];
    CHECK(row.epoch_id == k);
    CHECK(row.epsilon == opts.epsilon.at(k));
    CHECK(row.context.p_min == stream.execute(k, space.min_config()).power);
    CHECK(row.context.t_min == stream.execute(k, space.max_config()).exec_time);
    const auto& d = run.decisions.rows[k];
    CHECK(d.config == space.at(row.action));
    CHECK(row.reward == reward(d.power, d.time, row.context, opts.beta));
  }

  // Identical seeds reproduce the run.
  DqnLearner twin(space.size(), fitted_scaler(), 8);
  const RlRun again = run_rl_control(stream, space, twin, opts);
  for (std::size_t k = 0; k < stream.size(); ++k) CHECK(again.log[k].action == run.log[k].action);

  QTable small(7);
  CHECK_THROWS_AS(run_rl_control(stream, space, small, opts), DomainError);

  test::TempDir dir("rl");
  save_rl_log({run.log[0]}, dir / "rl.csv");
  const std::string text = test::slurp(dir / "rl.csv");
  CHECK(text.rfind("epoch_id,state_repr,action_index,reward,epsilon\n0,ipc=", 0) == 0);
}
