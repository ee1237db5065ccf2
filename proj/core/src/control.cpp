#include "ilgov/control.hpp"

#include "ilgov/governors.hpp"
#include "ilgov/rng.hpp"

namespace ilgov {

OnlineIlRun run_online_il(const Stream& stream, const ConfigSpace& space, PolicyBundle policy,
                          PlatformModels models, const OnlineIlOptions& opts) {
  OnlineIlRun run{{"online-il", {}}, {}, std::move(policy), std::move(models), 0, {}};
  TrainingBuffer buffer(opts.buffer_capacity);
  Configuration prev = powersave(space);

  for (std::size_t k = 0; k < stream.size(); ++k) {
    const CounterVector state = stream.execute(k, prev).counters;
    if (!run.policy.scaler.frozen) run.policy.scaler.observe(raw_policy_features(state));

    const Configuration chosen = run.policy.predict(state, space);
    const EpochObservation obs = stream.execute(k, chosen);
    run.models.update(obs);

    const SearchResult s = online_oracle(space, chosen, obs.counters, run.models, opts.oracle);
    const Configuration target = space.at(s.index);
    run.online_labels.push_back({k, target, LabelSource::online_search, s.cost});

    if (observe_and_maybe_buffer(run.policy, buffer, state, target, space)) ++run.disagreements;
    bool retrained = false;
    if (buffer.full()) {
      const auto seed = hash_combine(opts.seed, run.retrain_epochs.size());
      run.policy = retrain_online(run.policy, buffer, opts.train, seed);
      run.retrain_epochs.push_back(k);
      retrained = true;
    }
    run.decisions.rows.push_back({k, stream.workload(k).name, chosen, obs.power, obs.exec_time,
                                  obs.energy(), s.evaluations, run.models.updates(), retrained});
    prev = chosen;
  }
  return run;
}

DecisionLog run_policy(const Stream& stream, const ConfigSpace& space, const PolicyBundle& policy,
                       std::string name) {
  DecisionLog log{std::move(name), {}};
  Configuration prev = powersave(space);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const CounterVector state = stream.execute(k, prev).counters;
    const Configuration c = policy.predict(state, space);
    const EpochObservation o = stream.execute(k, c);
    log.rows.push_back({k, stream.workload(k).name, c, o.power, o.exec_time, o.energy(), 0, 0, false});
    prev = c;
  }
  return log;
}

}  // namespace ilgov
