#include <algorithm>
#include <cmath>
#include <limits>

#include "ilgov/errors.hpp"
#include "ilgov/rng.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

std::string_view profile_name(Profile p) {
  switch (p) {
    case Profile::compute_bound: return "compute-bound";
    case Profile::memory_bound: return "memory-bound";
    case Profile::parallel: return "parallel";
    case Profile::mixed: return "mixed";
  }
  return "?";
}

Profile parse_profile(std::string_view name) {
  for (Profile p : {Profile::compute_bound, Profile::memory_bound, Profile::parallel,
                    Profile::mixed})
    if (profile_name(p) == name) return p;
  throw DomainError("unknown workload profile '" + std::string(name) + "'");
}

ProfileRanges profile_ranges(Profile p) {
  switch (p) {
    case Profile::compute_bound: return {{0.0, 0.25}, {0.0, 0.4}, {0.0, 1.0}};
    case Profile::memory_bound: return {{0.55, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
    case Profile::parallel: return {{0.0, 0.5}, {0.6, 1.0}, {0.0, 1.0}};
    case Profile::mixed: return {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  }
  throw DomainError("unknown workload profile");
}

double energy_margin(const PlantParams& p, const Epoch& e, const ConfigSpace& space,
                     double beta) {
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const PlantTruth t = plant_truth(p, e, space.at(i));
    const double cost = t.power * std::pow(t.exec_time, beta);
    if (cost < best) {
      second = best;
      best = cost;
    } else if (cost < second) {
      second = cost;
    }
  }
  return second / best - 1.0;
}

std::size_t energy_argmin(const PlantParams& p, const Epoch& e, const ConfigSpace& space,
                          double beta) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const PlantTruth t = plant_truth(p, e, space.at(i));
    const double cost = t.power * std::pow(t.exec_time, beta);
    if (cost < best) {
      best = cost;
      arg = i;
    }
  }
  return arg;
}

bool label_stable(const PlantParams& p, const Epoch& e, const ConfigSpace& space, double beta,
                  double radius) {
  const std::size_t center = energy_argmin(p, e, space, beta);
  for (double Epoch::*latent :
       {&Epoch::memory_intensity, &Epoch::parallel_fraction, &Epoch::branchiness}) {
    for (double sign : {-1.0, 1.0}) {
      Epoch shifted = e;
      shifted.*latent = std::clamp(e.*latent + sign * radius, 0.0, 1.0);
      if (energy_argmin(p, shifted, space, beta) != center) return false;
    }
  }
  return true;
}

namespace {

struct Kernel {
  double instructions;
  double mi;
  double par;
  double br;
};

Kernel draw_kernel(Rng& rng, const ProfileRanges& r, const GeneratorOptions& o) {
  Kernel k;
  k.instructions = std::exp(rng.uniform(std::log(o.min_instructions), std::log(o.max_instructions)));
  k.mi = rng.uniform(r.memory_intensity.lo, r.memory_intensity.hi);
  k.par = rng.uniform(r.parallel_fraction.lo, r.parallel_fraction.hi);
  k.br = rng.uniform(r.branchiness.lo, r.branchiness.hi);
  return k;
}

}  // namespace

Workload generate_workload(Profile profile, std::size_t n_epochs, std::uint64_t seed,
                           const GeneratorOptions& o) {
  if (n_epochs < 1) throw DomainError("a workload needs at least one epoch");
  if (o.min_kernels < 1 || o.max_kernels < o.min_kernels)
    throw DomainError("invalid kernel count range");
  if (!(o.min_instructions > 0) || o.max_instructions < o.min_instructions)
    throw DomainError("invalid instruction range");

  const auto tag = static_cast<std::uint64_t>(profile) + 1;
  Rng rng(hash_combine(seed, tag));
  const ProfileRanges ranges = profile_ranges(profile);
  const ConfigSpace space;

  const int n_kernels =
      o.min_kernels + static_cast<int>(rng.index(static_cast<std::size_t>(o.max_kernels - o.min_kernels + 1)));
  std::vector<Kernel> kernels;
  for (int i = 0; i < n_kernels; ++i) {
    Kernel k = draw_kernel(rng, ranges, o);
    if (o.min_margin > 0 || o.label_radius > 0) {
      // Keep the first acceptable draw; otherwise the stable draw (or any draw)
      // with the widest margin.
      Kernel best = k;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const Epoch probe{0, k.instructions, k.mi, k.par, k.br, 0, 0};
        const double m = energy_margin(o.plant, probe, space, o.beta);
        const bool stable =
            o.label_radius <= 0 || label_stable(o.plant, probe, space, o.beta, o.label_radius);
        const double score = m + (stable ? 1.0 : 0.0);
        if (score > best_score) {
          best_score = score;
          best = k;
        }
        if (stable && m >= o.min_margin) break;
        k = draw_kernel(rng, ranges, o);
      }
      k = best;
    }
    kernels.push_back(k);
  }

  Workload w;
  w.name = std::string(profile_name(profile)) + "-" + std::to_string(seed);
  w.epochs.reserve(n_epochs);
  std::size_t current = rng.index(kernels.size());
  for (std::size_t id = 0; id < n_epochs; ++id) {
    if (id > 0 && kernels.size() > 1 && rng.uniform() >= o.stickiness) {
      std::size_t next = rng.index(kernels.size() - 1);
      current = next >= current ? next + 1 : next;
    }
    const Kernel& k = kernels[current];
    const double jitter = 1.0 + o.instruction_jitter * (2.0 * rng.uniform() - 1.0);
    Epoch e;
    e.id = id;
    e.instructions = std::clamp(k.instructions * jitter, o.min_instructions, o.max_instructions);
    e.memory_intensity = k.mi;
    e.parallel_fraction = k.par;
    e.branchiness = k.br;
    e.kernel = static_cast<int>(current);
    e.noise_key = hash_combine(hash_combine(seed, tag), id);
    w.epochs.push_back(e);
  }
  w.plant = std::make_shared<SyntheticPlant>(o.plant, o.plant_seed);
  return w;
}

Workload generate_workload(std::string_view profile, std::size_t n_epochs, std::uint64_t seed,
                           const GeneratorOptions& opts) {
  return generate_workload(parse_profile(profile), n_epochs, seed, opts);
}

void TracePlant::record(const EpochObservation& obs) {
  auto [it, inserted] = rows_.emplace(std::make_pair(obs.epoch_id, obs.config), obs);
  if (!inserted)
    throw FormatError("duplicate trace row for epoch " + std::to_string(obs.epoch_id) +
                      " at " + to_string(obs.config));
}

EpochObservation TracePlant::execute(const Epoch& e, const Configuration& c) const {
  auto it = rows_.find({e.id, c});
  if (it == rows_.end())
    throw LookupError("trace has no row for epoch " + std::to_string(e.id) + " at " +
                      to_string(c));
  return it->second;
}

Stream Stream::of(const Workload& w) { return sequence({&w}, 1, 0); }

Stream Stream::sequence(const std::vector<const Workload*>& order, std::size_t repetitions,
                        std::size_t segment) {
  Stream s;
  std::vector<std::size_t> cursor;
  for (const Workload* w : order) {
    if (!w) throw DomainError("null workload in sequence");
    auto it = std::find(s.workloads_.begin(), s.workloads_.end(), w);
    if (it == s.workloads_.end()) {
      s.workloads_.push_back(w);
      cursor.push_back(0);
    }
  }
  for (std::size_t r = 0; r < repetitions; ++r) {
    for (const Workload* w : order) {
      const auto wi = static_cast<std::size_t>(
          std::find(s.workloads_.begin(), s.workloads_.end(), w) - s.workloads_.begin());
      const std::size_t n = w->epochs.size();
      if (n == 0) continue;
      const std::size_t len = segment == 0 ? n : segment;
      for (std::size_t j = 0; j < len; ++j) {
        s.items_.push_back({wi, cursor[wi]});
        cursor[wi] = (cursor[wi] + 1) % n;
      }
    }
  }
  return s;
}

const Epoch& Stream::epoch(std::size_t k) const {
  const Item& it = items_.at(k);
  return workloads_[it.workload]->epochs[it.epoch];
}

EpochObservation Stream::execute(std::size_t k, const Configuration& c) const {
  const Item& it = items_.at(k);
  return workloads_[it.workload]->execute(it.epoch, c);
}

}  // namespace ilgov
