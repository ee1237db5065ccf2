#include <cmath>

#include "ilgov/errors.hpp"
#include "ilgov/rng.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

double voltage(const PlantParams& p, int f_mhz, bool big) {
  return p.v0 + p.v_slope * (f_mhz - 600) / 1400.0 + (big ? p.v_big_offset : 0.0);
}

PlantTruth plant_truth(const PlantParams& p, const Epoch& e, const Configuration& c) {
  const double W = e.instructions;
  const double mi = e.memory_intensity;
  const double par = e.parallel_fraction;
  const double fb = c.f_big * 1e6;
  const double fl = c.f_little * 1e6;
  const double cap = c.n_big * fb + p.little_throughput * c.n_little * fl;
  const int cores = c.n_big + c.n_little;

  // Amdahl split: serial part on one big core, parallel part over the cluster
  // capacity, stalls shrink with the number of cores sharing them.
  const double t_serial = W * (1.0 - par) * p.cpi_big / fb;
  const double t_par = W * par * p.cpi_big / cap;
  const double t_mem = p.mem_stall * W * mi * ((1.0 - par) + par / cores);
  const double t = t_serial + t_par + t_mem;

  const double u = p.spin_util + (1.0 - p.spin_util) * (t_par + par * t_mem) / t;

  const double vb = voltage(p, c.f_big, true);
  const double vl = voltage(p, c.f_little, false);
  const double act = 1.0 + p.act_branch * e.branchiness - p.act_mem * mi;
  const double dyn = p.ceff_big * act * vb * vb * fb * (1.0 + (c.n_big - 1) * u) +
                     p.ceff_little * act * vl * vl * fl * c.n_little * u;
  const double leak = c.n_big * vb * p.ileak_big + c.n_little * vl * p.ileak_little;
  return {dyn + leak + p.p_base + p.p_mem * mi, t, u};
}

EpochObservation plant_execute(const PlantParams& p, const Epoch& e, const Configuration& c,
                               std::uint64_t seed) {
  if (!(e.instructions > 0)) throw DomainError("epoch has no instructions");
  if (c.n_big < 1 || c.n_big > 4 || c.n_little < 1 || c.n_little > 4)
    throw DomainError("core counts must be in [1,4]: " + to_string(c));
  const PlantTruth truth = plant_truth(p, e, c);

  std::uint64_t key = hash_combine(seed, e.noise_key);
  key = hash_combine(key, static_cast<std::uint64_t>(c.n_big) << 48 |
                              static_cast<std::uint64_t>(c.n_little) << 32 |
                              static_cast<std::uint64_t>(c.f_big) << 16 |
                              static_cast<std::uint64_t>(c.f_little));
  int slot = 0;
  auto noisy = [&](double v) {
    const double u = hashed_uniform(hash_combine(key, static_cast<std::uint64_t>(slot++)));
    return v * (1.0 + p.noise_bound * (u - 0.5));
  };

  const double W = e.instructions;
  const double mi = e.memory_intensity;
  const double par = e.parallel_fraction;
  const double br = e.branchiness;

  EpochObservation obs;
  obs.epoch_id = e.id;
  obs.config = c;
  CounterVector& h = obs.counters;
  h.instructions = W;
  h.cycles = noisy(W * (p.cyc0 + p.cyc_mem * mi + p.cyc_branch * br));
  h.branch_miss = noisy(W * (p.bm0 + p.bm_branch * br));
  h.l2_miss = noisy(W * (p.l2_0 + p.l2_mem * mi));
  h.dmem_access = noisy(W * (p.dm0 + p.dm_mem * mi + p.dm_par_mem * par * mi));
  h.noncache_req = noisy(W * (p.nc0 + p.nc_par * par + p.nc_mem * mi));
  h.little_util = truth.other_util;
  h.big_util[0] = 1.0;
  for (int i = 1; i < 4; ++i) h.big_util[i] = i < c.n_big ? truth.other_util : 0.0;
  h.power = truth.power;
  obs.power = truth.power;
  obs.exec_time = truth.exec_time;
  return obs;
}

}  // namespace ilgov
