#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ilgov/config_space.hpp"

namespace ilgov {

// Per-epoch hardware counters (one row of the counter table).
struct CounterVector {
  double instructions = 0;
  double cycles = 0;
  double branch_miss = 0;
  double l2_miss = 0;
  double dmem_access = 0;
  double noncache_req = 0;
  double little_util = 0;
  std::array<double, 4> big_util{};
  double power = 0;

  friend bool operator==(const CounterVector&, const CounterVector&) = default;
};

struct Epoch {
  std::size_t id = 0;
  double instructions = 0;
  // Latent characteristics; only meaningful for synthetic workloads.
  double memory_intensity = 0;
  double parallel_fraction = 0;
  double branchiness = 0;
  int kernel = 0;
  std::uint64_t noise_key = 0;
};

struct EpochObservation {
  std::size_t epoch_id = 0;
  Configuration config;
  CounterVector counters;
  double power = 0;
  double exec_time = 0;

  double energy() const { return power * exec_time; }
  friend bool operator==(const EpochObservation&, const EpochObservation&) = default;
};

// Answers "what would epoch e measure at configuration c".
class Plant {
 public:
  virtual ~Plant() = default;
  virtual EpochObservation execute(const Epoch& e, const Configuration& c) const = 0;
};

struct PlantParams {
  // Latency
  double cpi_big = 0.902;              // cycles per instruction on a big core, no stalls
  double little_throughput = 0.489;    // little-core throughput relative to a big core at equal f
  double mem_stall = 2.52e-9;          // seconds per instruction per unit memory intensity
  double spin_util = 0.962;            // utilization floor of secondary cores
  // Power
  double ceff_big = 6.31e-10;          // F per active big core
  double ceff_little = 8.54e-11;
  double ileak_big = 0.00981;          // A per active core
  double ileak_little = 0.0079;
  double p_base = 1.75;                // W, uncore and board
  double p_mem = 0.194;                // W per unit memory intensity
  double act_branch = 0.418;           // switching activity gain from branchiness
  double act_mem = 0.347;              // switching activity loss from memory stalls
  // Voltage map V(f) = v0 + v_slope * (f - 600) / 1400, big cluster offset
  double v0 = 0.9;
  double v_slope = 0.4;
  double v_big_offset = 0.1;
  // Counter rates per instruction, affine in the latent characteristics
  double cyc0 = 0.9, cyc_mem = 1.5, cyc_branch = 0.3;
  double bm0 = 0.002, bm_branch = 0.02;
  double l2_0 = 0.0005, l2_mem = 0.02;
  double dm0 = 0.03, dm_mem = 0.12, dm_par_mem = 0.25;
  double nc0 = 0.0002, nc_par = 0.004, nc_mem = 0.001;
  // Counter noise: multiplicative uniform within +/- noise_bound / 2
  double noise_bound = 0.01;
};

double voltage(const PlantParams& p, int f_mhz, bool big);

// Noise-free ground truth for a single execution.
struct PlantTruth {
  double power;
  double exec_time;
  double other_util;  // utilization of every active core except big core 0
};
PlantTruth plant_truth(const PlantParams& p, const Epoch& e, const Configuration& c);

EpochObservation plant_execute(const PlantParams& p, const Epoch& e, const Configuration& c,
                               std::uint64_t seed);

class SyntheticPlant final : public Plant {
 public:
  explicit SyntheticPlant(PlantParams params = {}, std::uint64_t seed = 0)
      : params_(params), seed_(seed) {}
  EpochObservation execute(const Epoch& e, const Configuration& c) const override {
    return plant_execute(params_, e, c, seed_);
  }
  const PlantParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

 private:
  PlantParams params_;
  std::uint64_t seed_;
};

// Answers from recorded rows keyed by (epoch id, configuration).
class TracePlant final : public Plant {
 public:
  void record(const EpochObservation& obs);  // throws FormatError on duplicates
  EpochObservation execute(const Epoch& e, const Configuration& c) const override;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::map<std::pair<std::size_t, Configuration>, EpochObservation> rows_;
};

struct Workload {
  std::string name;
  std::vector<Epoch> epochs;
  std::shared_ptr<const Plant> plant;

  EpochObservation execute(std::size_t k, const Configuration& c) const {
    return plant->execute(epochs.at(k), c);
  }
};

enum class Profile { compute_bound, memory_bound, parallel, mixed };

std::string_view profile_name(Profile p);
Profile parse_profile(std::string_view name);  // DomainError on unknown names

struct LatentRange {
  double lo;
  double hi;
};

struct ProfileRanges {
  LatentRange memory_intensity;
  LatentRange parallel_fraction;
  LatentRange branchiness;
};
ProfileRanges profile_ranges(Profile p);

struct GeneratorOptions {
  int min_kernels = 2;
  int max_kernels = 3;
  double stickiness = 0.9;       // probability an epoch repeats the previous kernel
  double min_instructions = 1e7;
  double max_instructions = 1e8;
  double instruction_jitter = 0.15;
  // Kernels whose best and second-best energy differ by less than this relative
  // margin are redrawn, so the energy optimum is identifiable. 0 disables.
  double min_margin = 0.0;
  // Kernels whose optimum changes when any latent moves by this much are
  // redrawn, keeping kernels with different optima apart. 0 disables.
  double label_radius = 0.0;
  double beta = 1.0;
  PlantParams plant;
  std::uint64_t plant_seed = 0;
};

// Deterministic in (profile, n_epochs, seed, options).
Workload generate_workload(Profile profile, std::size_t n_epochs, std::uint64_t seed,
                           const GeneratorOptions& opts = {});
Workload generate_workload(std::string_view profile, std::size_t n_epochs, std::uint64_t seed,
                           const GeneratorOptions& opts = {});

// Relative gap between the lowest and second-lowest P*t^beta over the space.
double energy_margin(const PlantParams& p, const Epoch& e, const ConfigSpace& space, double beta);
// Index of the configuration minimizing P*t^beta for the epoch's latents.
std::size_t energy_argmin(const PlantParams& p, const Epoch& e, const ConfigSpace& space,
                          double beta);
// True when shifting any one latent by +-radius (clamped to [0, 1]) keeps the argmin.
bool label_stable(const PlantParams& p, const Epoch& e, const ConfigSpace& space, double beta,
                  double radius);

// Trace CSV
extern const char* const kTraceHeader;
void save_trace(const Workload& w, const std::vector<Configuration>& configs,
                const std::filesystem::path& path);
Workload load_trace(const std::filesystem::path& path);

// Ordered view over epochs drawn from several workloads, as run by a controller.
class Stream {
 public:
  struct Item {
    std::size_t workload;
    std::size_t epoch;
  };

  Stream() = default;
  static Stream of(const Workload& w);
  // Repeats the named workloads in order `repetitions` times, `segment` epochs each
  // (0 = whole workload). Segments cycle through each workload's epochs.
  static Stream sequence(const std::vector<const Workload*>& order, std::size_t repetitions,
                         std::size_t segment = 0);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Epoch& epoch(std::size_t k) const;
  const Workload& workload(std::size_t k) const { return *workloads_[items_.at(k).workload]; }
  std::size_t workload_index(std::size_t k) const { return items_.at(k).workload; }
  const std::vector<const Workload*>& workloads() const { return workloads_; }
  EpochObservation execute(std::size_t k, const Configuration& c) const;

 private:
  std::vector<const Workload*> workloads_;
  std::vector<Item> items_;
};

}  // namespace ilgov
