#pragma once

#include <string>

#include "ilgov/config_space.hpp"
#include "ilgov/decision_log.hpp"
#include "ilgov/models.hpp"
#include "ilgov/oracle.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

// Lowest level of every knob.
Configuration powersave(const ConfigSpace& space);
// Highest level of every knob.
Configuration performance(const ConfigSpace& space);

// Runs every epoch at one configuration.
DecisionLog run_fixed(const Stream& stream, const Configuration& c, std::string name);

// Runs each epoch at its oracle label.
DecisionLog run_labels(const Stream& stream, const std::vector<OracleLabel>& labels,
                       std::string name = "oracle");

struct ModelsOnlyRun {
  DecisionLog decisions;
  PlatformModels models;
};

// Local search over model estimates seeded at the previous epoch's choice (powersave
// for the first epoch), no learned policy; models are updated by RLS after each epoch.
ModelsOnlyRun models_only_control(const Stream& stream, const ConfigSpace& space,
                                  PlatformModels models, const OnlineOracleOptions& search);

}  // namespace ilgov
