#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ilgov/config_space.hpp"

namespace ilgov {

struct DecisionRow {
  std::size_t epoch_id = 0;
  std::string workload;
  Configuration config;
  double power = 0;
  double time = 0;
  double energy = 0;
  std::size_t oracle_evals = 0;
  std::size_t model_updates = 0;
  bool retrained = false;
};

// Per-epoch record shared by every controller.
struct DecisionLog {
  std::string controller;
  std::vector<DecisionRow> rows;

  // CSV: epoch_id,workload,n_big,n_little,f_big,f_little,power_w,time_s,energy_j,
  //      oracle_evals,model_updates,retrained
  void save(const std::filesystem::path& path) const;
  static DecisionLog load(const std::filesystem::path& path, std::string controller);
};

}  // namespace ilgov
