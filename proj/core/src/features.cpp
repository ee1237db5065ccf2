#include <cmath>
#include <fstream>

#include "ilgov/errors.hpp"
#include "ilgov/models.hpp"
#include "text_io.hpp"

namespace ilgov {

RateNormalizer::Rates RateNormalizer::rates(const CounterVector& h) {
  if (!(h.instructions > 0)) throw NumericError("instruction count must be positive");
  return {h.branch_miss / h.instructions, h.l2_miss / h.instructions,
          h.dmem_access / h.instructions, h.noncache_req / h.instructions};
}

void RateNormalizer::fit(const std::vector<CounterVector>& samples) {
  if (samples.empty()) throw DomainError("cannot fit normalization on no samples");
  Rates sum{}, sq{};
  for (const auto& h : samples) {
    const Rates r = rates(h);
    for (int i = 0; i < kRates; ++i) sum[i] += r[i];
  }
  const double n = static_cast<double>(samples.size());
  for (int i = 0; i < kRates; ++i) mean[i] = sum[i] / n;
  for (const auto& h : samples) {
    const Rates r = rates(h);
    for (int i = 0; i < kRates; ++i) sq[i] += (r[i] - mean[i]) * (r[i] - mean[i]);
  }
  for (int i = 0; i < kRates; ++i) {
    const double sd = std::sqrt(sq[i] / n);
    stddev[i] = sd > 1e-12 * std::abs(mean[i]) && sd > 0 ? sd : 1.0;
  }
  count_ = samples.size();
  frozen_ = true;
}

void RateNormalizer::observe(const CounterVector& h) {
  if (frozen_) return;
  const Rates r = rates(h);
  ++count_;
  for (int i = 0; i < kRates; ++i) {
    const double d = r[i] - mean[i];
    mean[i] += d / static_cast<double>(count_);
    m2_[i] += d * (r[i] - mean[i]);
    const double sd = count_ > 1 ? std::sqrt(m2_[i] / static_cast<double>(count_)) : 0.0;
    stddev[i] = sd > 0 ? sd : 1.0;
  }
  if (count_ >= freeze_after) frozen_ = true;
}

Eigen::Matrix<double, RateNormalizer::kRates + 1, 1> RateNormalizer::augmented(
    const CounterVector& h) const {
  const Rates r = rates(h);
  Eigen::Matrix<double, kRates + 1, 1> out;
  out[0] = 1.0;
  for (int i = 0; i < kRates; ++i) out[i + 1] = (r[i] - mean[i]) / stddev[i];
  return out;
}

namespace {

double volt(const FeatureConfig& cfg, int f, bool big) {
  return cfg.v0 + cfg.v_slope * (f - 600) / 1400.0 + (big ? cfg.v_big_offset : 0.0);
}

void check_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw NumericError("non-finite model features");
}

}  // namespace

Eigen::VectorXd power_features(const CounterVector& h, const Configuration& c,
                               const RateNormalizer& norm, const FeatureConfig& cfg) {
  const auto r = norm.augmented(h);
  const double u = h.little_util;
  const double vb = volt(cfg, c.f_big, true);
  const double vl = volt(cfg, c.f_little, false);
  const double fb = c.f_big * 1e-3;
  const double fl = c.f_little * 1e-3;
  const double scale[5] = {vb * vb * fb * (1.0 + (c.n_big - 1) * u),
                           vl * vl * fl * c.n_little * u, vb * c.n_big, vl * c.n_little, 1.0};
  Eigen::VectorXd phi(kPowerFeatures);
  for (int b = 0; b < 5; ++b) phi.segment<5>(5 * b) = scale[b] * r;
  check_finite(phi);
  return phi;
}

Eigen::VectorXd time_features(const CounterVector& h, const Configuration& c,
                              const RateNormalizer& norm, const FeatureConfig& cfg) {
  const auto r = norm.augmented(h);
  const double w = h.instructions / cfg.instruction_scale;
  const double fb = c.f_big * 1e-3;
  const double fl = c.f_little * 1e-3;
  const double cap = c.n_big * fb + cfg.little_throughput * c.n_little * fl;
  const double g[4] = {1.0 / fb, 1.0 / cap, 1.0 / (c.n_big + c.n_little), 1.0};
  Eigen::VectorXd phi(kTimeFeatures);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) phi[4 * i + j] = w * r[i] * g[j];
  check_finite(phi);
  return phi;
}

PlatformModels::PlatformModels(FeatureConfig cfg, RlsSettings rls)
    : cfg_(cfg),
      power_(kPowerFeatures, rls.forgetting, rls.p0, rls.trace_cap),
      time_(kTimeFeatures, rls.forgetting, rls.p0, rls.trace_cap) {}

PlatformModels PlatformModels::fit_offline(const std::vector<EpochObservation>& obs,
                                           FeatureConfig cfg, RlsSettings rls,
                                           OfflineFitReport* report) {
  if (obs.empty()) throw DomainError("offline fit needs observations");
  PlatformModels m(cfg, rls);
  std::vector<CounterVector> hs;
  hs.reserve(obs.size());
  for (const auto& o : obs) hs.push_back(o.counters);
  m.norm_.fit(hs);

  const auto n = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd Xp(n, kPowerFeatures), Xt(n, kTimeFeatures);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    if (!(o.power > 0) || !(o.exec_time > 0)) throw DomainError("measurements must be positive");
    Xp.row(i) = power_features(o.counters, o.config, m.norm_, cfg).transpose() / o.power;
    Xt.row(i) = time_features(o.counters, o.config, m.norm_, cfg).transpose() / o.exec_time;
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  OfflineFitReport rep;
  rep.power_ridge = solve_least_squares(Xp, ones, m.power_.theta);
  rep.time_ridge = solve_least_squares(Xt, ones, m.time_.theta);
  rep.samples = obs.size();
  rep.power_mean_rel_error = (Xp * m.power_.theta - ones).cwiseAbs().mean();
  rep.time_mean_rel_error = (Xt * m.time_.theta - ones).cwiseAbs().mean();
  if (report) *report = rep;
  return m;
}

double PlatformModels::predict_power(const CounterVector& h, const Configuration& c) const {
  return power_.predict(power_features(h, c, norm_, cfg_));
}

double PlatformModels::predict_time(const CounterVector& h, const Configuration& c) const {
  return std::max(time_.predict(time_features(h, c, norm_, cfg_)), cfg_.time_floor);
}

double PlatformModels::cost(const CounterVector& h, const Configuration& c, double beta) const {
  return predict_power(h, c) * std::pow(predict_time(h, c), beta);
}

void PlatformModels::update(const EpochObservation& obs) {
  if (!(obs.power > 0) || !(obs.exec_time > 0)) throw DomainError("measurements must be positive");
  if (!norm_.frozen()) norm_.observe(obs.counters);
  const Eigen::VectorXd pp = power_features(obs.counters, obs.config, norm_, cfg_) / obs.power;
  const Eigen::VectorXd pt = time_features(obs.counters, obs.config, norm_, cfg_) / obs.exec_time;
  LinearModel power_backup = power_;
  power_.rls_update(pp, 1.0);
  try {
    time_.rls_update(pt, 1.0);
  } catch (...) {
    power_ = std::move(power_backup);
    throw;
  }
  ++updates_;
}

void PlatformModels::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "ilgov-models 1\n";
  os << "features";
  for (double v : {cfg_.v0, cfg_.v_slope, cfg_.v_big_offset, cfg_.little_throughput,
                   cfg_.instruction_scale, cfg_.time_floor})
    detail::put(os, v);
  os << "\nnormalizer " << (norm_.frozen() ? 1 : 0) << ' ' << norm_.count_ << ' '
     << norm_.freeze_after;
  for (int i = 0; i < RateNormalizer::kRates; ++i) {
    detail::put(os, norm_.mean[i]);
    detail::put(os, norm_.stddev[i]);
    detail::put(os, norm_.m2_[i]);
  }
  os << '\n';
  for (const auto* m : {&power_, &time_}) {
    os << "model";
    detail::put(os, m->forgetting);
    detail::put(os, m->trace_cap);
    os << '\n';
    detail::put_vector(os, "theta", m->theta);
    detail::put_matrix(os, "covariance", m->P);
  }
  os << "updates " << updates_ << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

PlatformModels PlatformModels::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  detail::expect(is, "ilgov-models");
  if (detail::get_long(is) != 1) throw FormatError("unsupported model checkpoint version");
  detail::expect(is, "features");
  FeatureConfig cfg;
  cfg.v0 = detail::get_double(is);
  cfg.v_slope = detail::get_double(is);
  cfg.v_big_offset = detail::get_double(is);
  cfg.little_throughput = detail::get_double(is);
  cfg.instruction_scale = detail::get_double(is);
  cfg.time_floor = detail::get_double(is);
  PlatformModels m(cfg);
  detail::expect(is, "normalizer");
  m.norm_.frozen_ = detail::get_long(is) != 0;
  m.norm_.count_ = static_cast<std::size_t>(detail::get_long(is));
  m.norm_.freeze_after = static_cast<std::size_t>(detail::get_long(is));
  for (int i = 0; i < RateNormalizer::kRates; ++i) {
    m.norm_.mean[i] = detail::get_double(is);
    m.norm_.stddev[i] = detail::get_double(is);
    m.norm_.m2_[i] = detail::get_double(is);
  }
  for (auto* lm : {&m.power_, &m.time_}) {
    detail::expect(is, "model");
    lm->forgetting = detail::get_double(is);
    lm->trace_cap = detail::get_double(is);
    lm->theta = detail::get_vector(is, "theta");
    lm->P = detail::get_matrix(is, "covariance");
    if (lm->P.rows() != lm->theta.size() || lm->P.cols() != lm->theta.size())
      throw FormatError("checkpoint covariance does not match theta");
  }
  if (m.power_.dim() != kPowerFeatures || m.time_.dim() != kTimeFeatures)
    throw FormatError("checkpoint feature dimension mismatch");
  detail::expect(is, "updates");
  m.updates_ = static_cast<std::size_t>(detail::get_long(is));
  return m;
}

}  // namespace ilgov
