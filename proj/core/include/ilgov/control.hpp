#pragma once

#include <cstdint>
#include <vector>

#include "ilgov/decision_log.hpp"
#include "ilgov/models.hpp"
#include "ilgov/oracle.hpp"
#include "ilgov/policy.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

struct OnlineIlOptions {
  OnlineOracleOptions oracle;
  std::size_t buffer_capacity = 100;
  OnlineTrainOptions train;
  std::uint64_t seed = 1;
};

struct OnlineIlRun {
  DecisionLog decisions;
  std::vector<OracleLabel> online_labels;
  PolicyBundle policy;
  PlatformModels models;
  std::size_t disagreements = 0;
  std::vector<std::size_t> retrain_epochs;
};

// The online imitation-learning loop. Per epoch: predict from the state observed at
// the previous configuration, execute, update the models, search for the oracle
// configuration around the prediction, buffer on disagreement and retrain when the
// buffer fills. The retrained policy takes over from the next epoch.
OnlineIlRun run_online_il(const Stream& stream, const ConfigSpace& space, PolicyBundle policy,
                          PlatformModels models, const OnlineIlOptions& opts);

// A fixed policy with no adaptation.
DecisionLog run_policy(const Stream& stream, const ConfigSpace& space, const PolicyBundle& policy,
                       std::string name = "static-offline");

}  // namespace ilgov
