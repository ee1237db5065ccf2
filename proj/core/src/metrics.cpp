#include "ilgov/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "ilgov/errors.hpp"

namespace ilgov {

double knob_accuracy(int levels, int policy_level, int ref_level) {
  if (levels < 2) throw DomainError("accuracy needs at least two levels");
  if (policy_level < 0 || policy_level >= levels || ref_level < 0 || ref_level >= levels)
    throw DomainError("level index out of range");
  return 100.0 * (1.0 - static_cast<double>(std::abs(policy_level - ref_level)) / (levels - 1));
}

double AccuracyReport::mean_all() const {
  return (mean[0] + mean[1] + mean[2] + mean[3]) / 4.0;
}

KnobScores AccuracyReport::accuracy_from(std::size_t first, std::size_t last) const {
  last = std::min(last, per_epoch.size());
  if (first >= last) throw DomainError("empty epoch range");
  KnobScores s{};
  for (std::size_t e = first; e < last; ++e)
    for (int k = 0; k < 4; ++k) s[k] += per_epoch[e][k];
  for (auto& v : s) v /= static_cast<double>(last - first);
  return s;
}

AccuracyReport run_accuracy(const std::vector<Configuration>& decisions,
                            const std::vector<Configuration>& reference, const ConfigSpace& space,
                            std::size_t window, double threshold) {
  if (decisions.empty()) throw DomainError("accuracy of an empty log is undefined");
  if (decisions.size() != reference.size()) throw DomainError("log and labels are misaligned");
  if (window < 1) throw DomainError("window must be positive");
  AccuracyReport r;
  r.window = window;
  r.threshold = threshold;
  const std::size_t n = decisions.size();
  r.per_epoch.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    const auto p = space.level_indices(decisions[e]);
    const auto q = space.level_indices(reference[e]);
    for (int k = 0; k < 4; ++k) {
      r.per_epoch[e][k] = knob_accuracy(space.level_count(kKnobs[k]), p[k], q[k]);
      r.mean[k] += r.per_epoch[e][k];
    }
  }
  for (auto& v : r.mean) v /= static_cast<double>(n);

  const std::size_t w = std::min(window, n);
  KnobScores sum{};
  for (std::size_t e = 0; e < n; ++e) {
    for (int k = 0; k < 4; ++k) sum[k] += r.per_epoch[e][k];
    if (e + 1 >= w) {
      KnobScores m{};
      for (int k = 0; k < 4; ++k) {
        m[k] = sum[k] / static_cast<double>(w);
        sum[k] -= r.per_epoch[e + 1 - w][k];
      }
      r.rolling.push_back(m);
    }
  }
  // Scan backwards: the convergence point is just after the last failing window.
  std::size_t overall = 0;
  for (int k = 0; k < 4; ++k) {
    std::size_t start = 0;
    for (std::size_t s = r.rolling.size(); s-- > 0;) {
      // Small tolerance so a window of exact 99.0 is not lost to rounding.
      if (r.rolling[s][k] < threshold - 1e-9) {
        start = s + 1;
        break;
      }
    }
    if (start < r.rolling.size()) r.knob_convergence[k] = start;
    overall = std::max(overall, start);
  }
  if (overall < r.rolling.size()) r.convergence = overall;
  return r;
}

AccuracyReport run_accuracy(const DecisionLog& log, const std::vector<OracleLabel>& reference,
                            const ConfigSpace& space, std::size_t window, double threshold) {
  if (log.rows.empty()) throw DomainError("accuracy of an empty log is undefined");
  if (log.rows.size() != reference.size()) throw DomainError("log and labels are misaligned");
  std::vector<Configuration> a, b;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (log.rows[i].epoch_id != reference[i].epoch_id)
      throw DomainError("log and labels disagree on epoch ids");
    a.push_back(log.rows[i].config);
    b.push_back(reference[i].config);
  }
  return run_accuracy(a, b, space, window, threshold);
}

std::vector<EnergyRow> energy_report(const std::vector<const DecisionLog*>& logs,
                                     std::size_t first) {
  if (logs.empty()) throw DomainError("no decision logs");
  const std::size_t n = logs.front()->rows.size();
  for (const auto* l : logs) {
    if (l->rows.size() != n) throw DomainError("controllers ran different epoch sets");
    for (std::size_t i = 0; i < n; ++i)
      if (l->rows[i].epoch_id != logs.front()->rows[i].epoch_id)
        throw DomainError("controllers ran different epoch sets");
  }
  if (first >= n) throw DomainError("empty epoch range");
  std::vector<EnergyRow> out;
  const EnergyRow* ps = nullptr;
  const EnergyRow* oracle = nullptr;
  for (const auto* l : logs) {
    EnergyRow r;
    r.controller = l->controller;
    for (std::size_t i = first; i < n; ++i) {
      r.energy += l->rows[i].energy;
      r.time += l->rows[i].time;
    }
    out.push_back(r);
  }
  for (const auto& r : out) {
    if (r.controller == "powersave") ps = &r;
    if (r.controller == "oracle") oracle = &r;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& r : out) {
    r.energy_vs_powersave = ps ? r.energy / ps->energy : nan;
    r.time_vs_powersave = ps ? r.time / ps->time : nan;
    r.energy_vs_oracle = oracle ? r.energy / oracle->energy : nan;
    r.time_vs_oracle = oracle ? r.time / oracle->time : nan;
  }
  return out;
}

std::map<std::string, Totals> totals_by_workload(const DecisionLog& log, std::size_t first) {
  std::map<std::string, Totals> out;
  for (std::size_t i = first; i < log.rows.size(); ++i) {
    auto& t = out[log.rows[i].workload];
    t.energy += log.rows[i].energy;
    t.time += log.rows[i].time;
  }
  return out;
}

}  // namespace ilgov
