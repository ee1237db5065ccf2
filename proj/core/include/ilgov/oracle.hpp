#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string_view>
#include <vector>

#include "ilgov/config_space.hpp"
#include "ilgov/models.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

enum class LabelSource { offline_exhaustive, online_search };
std::string_view source_name(LabelSource s);

struct ConfigCost {
  Configuration config;
  double cost = 0;
};

struct OracleLabel {
  std::size_t epoch_id = 0;
  Configuration config;
  LabelSource source = LabelSource::offline_exhaustive;
  double cost = 0;
};

// J = P * t^beta
double objective(double power, double time, double beta);

// Exhaustive minimizer of measured P * t^beta for one epoch; ties to the lowest index.
OracleLabel offline_label(const Epoch& e, const Plant& plant, const ConfigSpace& space,
                          double beta);
// One label per stream position.
std::vector<OracleLabel> offline_oracle(const Stream& stream, const ConfigSpace& space,
                                        double beta);
std::vector<OracleLabel> offline_oracle(const Workload& w, const ConfigSpace& space, double beta);

struct SearchResult {
  std::size_t index = 0;    // returned configuration
  double cost = 0;
  double start_cost = 0;
  std::size_t evaluations = 0;
  std::size_t moves = 0;
};

// Greedy descent over the one-step neighborhood graph. The start point costs one
// evaluation; whole neighborhoods are evaluated while the running count is within
// budget; the search stops early when the best neighbor does not improve.
SearchResult greedy_search(const ConfigSpace& space, std::size_t start,
                           const std::function<double(std::size_t)>& cost, std::size_t budget);

struct OnlineOracleOptions {
  std::size_t budget = 40;
  double beta = 1.0;
  double power_floor = 1e-3;  // predicted power is clamped here before forming the cost
};

// Budgeted local search over model-estimated cost, seeded at the policy's choice and
// reusing one counter vector for every candidate.
SearchResult online_oracle(const ConfigSpace& space, const Configuration& policy_choice,
                           const CounterVector& counters, const PlatformModels& models,
                           const OnlineOracleOptions& opts);

// CSV: epoch_id,source,n_big,n_little,f_big,f_little,cost
void save_labels(const std::vector<OracleLabel>& labels, const std::filesystem::path& path);

}  // namespace ilgov
