#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <vector>

#include "ilgov/config_space.hpp"
#include "ilgov/workload.hpp"

namespace ilgov {

// Linear predictor y = theta' phi with exponentially weighted RLS state.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(Eigen::Index dim, double forgetting, double p0, double trace_cap = 0.0);

  Eigen::Index dim() const { return theta.size(); }
  double predict(const Eigen::VectorXd& phi) const;

  // k = P phi / (lambda + phi' P phi); theta += k (y - phi' theta); P = (P - k phi' P) / lambda.
  // When trace_cap > 0 and trace(P) exceeds it, P is rescaled to the cap.
  // Throws NumericError and leaves the model unchanged on non-finite values.
  void rls_update(const Eigen::VectorXd& phi, double y);

  void reset_covariance(double p0);

  Eigen::VectorXd theta;
  Eigen::MatrixXd P;
  double forgetting = 0.99;
  double trace_cap = 0.0;
};

// z-score statistics over the per-instruction counter rates.
class RateNormalizer {
 public:
  static constexpr int kRates = 4;
  using Rates = std::array<double, kRates>;

  // branch_miss, l2_miss, dmem_access, noncache_req per instruction.
  static Rates rates(const CounterVector& h);

  void fit(const std::vector<CounterVector>& samples);
  // Running statistics (Welford) until `freeze_after` samples have been seen.
  void observe(const CounterVector& h);
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }
  std::size_t count() const { return count_; }
  std::size_t freeze_after = 20;

  // [1, z(rates)]
  Eigen::Matrix<double, kRates + 1, 1> augmented(const CounterVector& h) const;

  Rates mean{};
  Rates stddev{1, 1, 1, 1};

 private:
  friend class PlatformModels;
  Rates m2_{};
  std::size_t count_ = 0;
  bool frozen_ = false;
};

struct FeatureConfig {
  double v0 = 0.9;
  double v_slope = 0.4;
  double v_big_offset = 0.1;
  double little_throughput = 0.489;  // platform constant used in the capacity term
  double instruction_scale = 1e8;
  double time_floor = 1e-6;          // seconds
};

inline constexpr Eigen::Index kPowerFeatures = 25;
inline constexpr Eigen::Index kTimeFeatures = 20;

// Blocks: [V_B^2 f_B S_B, V_L^2 f_L S_L, V_B n_B, V_L n_L, 1] each times [1, z(rates)],
// where S is the summed utilization of the candidate's active cores, extrapolated
// from the secondary-core utilization in h.
Eigen::VectorXd power_features(const CounterVector& h, const Configuration& c,
                               const RateNormalizer& norm, const FeatureConfig& cfg);

// (instructions / scale) * [1, z(rates)] x [1/f_B, 1/capacity, 1/cores, 1] (GHz units).
Eigen::VectorXd time_features(const CounterVector& h, const Configuration& c,
                              const RateNormalizer& norm, const FeatureConfig& cfg);

struct RlsSettings {
  double forgetting = 0.99;
  double p0 = 1e3;
  // Bound on trace(P) after each update; keeps the forgetting factor from
  // inflating P along directions the executed configurations never excite.
  // 0 disables the cap.
  double trace_cap = 5.0;
};

struct OfflineFitReport {
  bool power_ridge = false;
  bool time_ridge = false;
  double power_mean_rel_error = 0;
  double time_mean_rel_error = 0;
  std::size_t samples = 0;
};

// Power and execution-time models sharing one normalizer. Regression is on
// relative error: every row is scaled by 1/measured before fitting or updating.
class PlatformModels {
 public:
  explicit PlatformModels(FeatureConfig cfg = {}, RlsSettings rls = {});

  // Ordinary least squares on a characterization set; ridge 1e-6 when rank deficient.
  static PlatformModels fit_offline(const std::vector<EpochObservation>& obs,
                                    FeatureConfig cfg = {}, RlsSettings rls = {},
                                    OfflineFitReport* report = nullptr);

  double predict_power(const CounterVector& h, const Configuration& c) const;
  double predict_time(const CounterVector& h, const Configuration& c) const;
  double cost(const CounterVector& h, const Configuration& c, double beta) const;

  // One RLS step on each model from a measurement.
  void update(const EpochObservation& obs);
  std::size_t updates() const { return updates_; }

  LinearModel& power() { return power_; }
  LinearModel& time() { return time_; }
  const LinearModel& power() const { return power_; }
  const LinearModel& time() const { return time_; }
  RateNormalizer& normalizer() { return norm_; }
  const RateNormalizer& normalizer() const { return norm_; }
  const FeatureConfig& features() const { return cfg_; }

  void save(const std::filesystem::path& path) const;
  static PlatformModels load(const std::filesystem::path& path);

 private:
  FeatureConfig cfg_;
  RateNormalizer norm_;
  LinearModel power_;
  LinearModel time_;
  std::size_t updates_ = 0;
};

// Least-squares solve with the ridge fallback; returns true when ridge was used.
bool solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         Eigen::VectorXd& theta, double ridge = 1e-6);

}  // namespace ilgov
