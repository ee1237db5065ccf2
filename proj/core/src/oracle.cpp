#include "ilgov/oracle.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "ilgov/errors.hpp"

namespace ilgov {

std::string_view source_name(LabelSource s) {
  return s == LabelSource::offline_exhaustive ? "offline-exhaustive" : "online-search";
}

double objective(double power, double time, double beta) { return power * std::pow(time, beta); }

OracleLabel offline_label(const Epoch& e, const Plant& plant, const ConfigSpace& space,
                          double beta) {
  OracleLabel best{e.id, space.at(0), LabelSource::offline_exhaustive,
                   std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration c = space.at(i);
    const EpochObservation o = plant.execute(e, c);
    const double j = objective(o.power, o.exec_time, beta);
    if (j < best.cost) {
      best.cost = j;
      best.config = c;
    }
  }
  return best;
}

std::vector<OracleLabel> offline_oracle(const Stream& stream, const ConfigSpace& space,
                                        double beta) {
  std::vector<OracleLabel> out;
  out.reserve(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) {
    OracleLabel l = offline_label(stream.epoch(k), *stream.workload(k).plant, space, beta);
    l.epoch_id = k;
    out.push_back(l);
  }
  return out;
}

std::vector<OracleLabel> offline_oracle(const Workload& w, const ConfigSpace& space,
                                        double beta) {
  std::vector<OracleLabel> out;
  out.reserve(w.epochs.size());
  for (const Epoch& e : w.epochs) out.push_back(offline_label(e, *w.plant, space, beta));
  return out;
}

SearchResult greedy_search(const ConfigSpace& space, std::size_t start,
                           const std::function<double(std::size_t)>& cost, std::size_t budget) {
  if (budget < 1) throw DomainError("search budget must be at least one evaluation");
  SearchResult r;
  r.index = start;
  r.cost = r.start_cost = cost(start);
  r.evaluations = 1;
  std::size_t current = start;
  while (r.evaluations <= budget) {
    std::size_t arg = current;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : space.neighbors(current)) {
      const double v = cost(j);
      ++r.evaluations;
      if (v < best) {
        best = v;
        arg = j;
      }
    }
    if (!(best < r.cost)) break;
    r.cost = best;
    r.index = arg;
    current = arg;
    ++r.moves;
  }
  return r;
}

SearchResult online_oracle(const ConfigSpace& space, const Configuration& policy_choice,
                           const CounterVector& counters, const PlatformModels& models,
                           const OnlineOracleOptions& opts) {
  auto cost = [&](std::size_t i) {
    const Configuration c = space.at(i);
    const double p = std::max(models.predict_power(counters, c), opts.power_floor);
    return objective(p, models.predict_time(counters, c), opts.beta);
  };
  return greedy_search(space, space.index_of(policy_choice), cost, opts.budget);
}

void save_labels(const std::vector<OracleLabel>& labels, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "epoch_id,source,n_big,n_little,f_big,f_little,cost\n";
  for (const auto& l : labels)
    os << fmt::format("{},{},{},{},{},{},{}\n", l.epoch_id, source_name(l.source),
                      l.config.n_big, l.config.n_little, l.config.f_big, l.config.f_little,
                      l.cost);
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace ilgov
