#include "ilgov/governors.hpp"

#include "ilgov/errors.hpp"

namespace ilgov {

Configuration powersave(const ConfigSpace& space) { return space.min_config(); }
Configuration performance(const ConfigSpace& space) { return space.max_config(); }

DecisionLog run_fixed(const Stream& stream, const Configuration& c, std::string name) {
  DecisionLog log{std::move(name), {}};
  log.rows.reserve(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const EpochObservation o = stream.execute(k, c);
    log.rows.push_back({k, stream.workload(k).name, c, o.power, o.exec_time, o.energy(), 0, 0, false});
  }
  return log;
}

DecisionLog run_labels(const Stream& stream, const std::vector<OracleLabel>& labels,
                       std::string name) {
  if (labels.size() != stream.size()) throw DomainError("labels do not cover the stream");
  DecisionLog log{std::move(name), {}};
  log.rows.reserve(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const Configuration c = labels[k].config;
    const EpochObservation o = stream.execute(k, c);
    log.rows.push_back({k, stream.workload(k).name, c, o.power, o.exec_time, o.energy(), 0, 0, false});
  }
  return log;
}

ModelsOnlyRun models_only_control(const Stream& stream, const ConfigSpace& space,
                                  PlatformModels models, const OnlineOracleOptions& search) {
  ModelsOnlyRun run{{"models-only", {}}, std::move(models)};
  Configuration prev = powersave(space);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const CounterVector state = stream.execute(k, prev).counters;
    const SearchResult s = online_oracle(space, prev, state, run.models, search);
    const Configuration c = space.at(s.index);
    const EpochObservation o = stream.execute(k, c);
    run.models.update(o);
    run.decisions.rows.push_back({k, stream.workload(k).name, c, o.power, o.exec_time, o.energy(),
                                  s.evaluations, run.models.updates(), false});
    prev = c;
  }
  return run;
}

}  // namespace ilgov
