#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ilgov/config_space.hpp"
#include "ilgov/decision_log.hpp"
#include "ilgov/oracle.hpp"

namespace ilgov {

// 100 (1 - |policy - ref| / (levels - 1))
double knob_accuracy(int levels, int policy_level, int ref_level);

using KnobScores = std::array<double, 4>;

struct AccuracyReport {
  KnobScores mean{};
  std::vector<KnobScores> per_epoch;
  std::vector<KnobScores> rolling;  // rolling[s] = mean over epochs [s, s + window)
  std::size_t window = 20;
  double threshold = 99.0;
  // First window start after which every window stays at or above the threshold.
  std::array<std::optional<std::size_t>, 4> knob_convergence;
  std::optional<std::size_t> convergence;  // all knobs

  double mean_all() const;
  KnobScores accuracy_from(std::size_t first, std::size_t last) const;  // epochs [first, last)
  KnobScores final_rolling() const { return rolling.back(); }
};

// Per-knob accuracy against reference labels aligned by position and epoch id.
AccuracyReport run_accuracy(const DecisionLog& log, const std::vector<OracleLabel>& reference,
                            const ConfigSpace& space, std::size_t window = 20,
                            double threshold = 99.0);
AccuracyReport run_accuracy(const std::vector<Configuration>& decisions,
                            const std::vector<Configuration>& reference, const ConfigSpace& space,
                            std::size_t window = 20, double threshold = 99.0);

struct EnergyRow {
  std::string controller;
  double energy = 0;
  double time = 0;
  double energy_vs_powersave = 0;  // NaN when no powersave log is present
  double time_vs_powersave = 0;
  double energy_vs_oracle = 0;     // NaN when no oracle log is present
  double time_vs_oracle = 0;
};

// Totals per controller over epochs [first, end), with ratios against the
// "powersave" and "oracle" logs when present.
std::vector<EnergyRow> energy_report(const std::vector<const DecisionLog*>& logs,
                                     std::size_t first = 0);

struct Totals {
  double energy = 0;
  double time = 0;
};
// Totals per workload name over epochs [first, end).
std::map<std::string, Totals> totals_by_workload(const DecisionLog& log, std::size_t first = 0);

}  // namespace ilgov
