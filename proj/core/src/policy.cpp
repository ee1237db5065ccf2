#include "ilgov/policy.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "ilgov/errors.hpp"
#include "text_io.hpp"

namespace ilgov {

Eigen::VectorXd raw_policy_features(const CounterVector& h) {
  if (!(h.instructions > 0) || !(h.cycles > 0))
    throw NumericError("instructions and cycles must be positive");
  Eigen::VectorXd x(kPolicyFeatures);
  x << h.instructions, h.cycles, h.branch_miss, h.l2_miss, h.dmem_access, h.noncache_req,
      h.little_util, h.big_util[0], h.big_util[1], h.big_util[2], h.big_util[3], h.power,
      h.instructions / h.cycles, h.branch_miss / h.instructions, h.l2_miss / h.instructions,
      h.dmem_access / h.instructions, h.noncache_req / h.instructions;
  if (!x.allFinite()) throw NumericError("non-finite counters");
  return x;
}

void FeatureScaler::fit(const std::vector<Eigen::VectorXd>& raw) {
  if (raw.empty()) throw DomainError("cannot fit feature scaler on no samples");
  mean.setZero();
  for (const auto& x : raw) mean += x;
  mean /= static_cast<double>(raw.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(kPolicyFeatures);
  for (const auto& x : raw) var += (x - mean).cwiseAbs2();
  var /= static_cast<double>(raw.size());
  for (Eigen::Index i = 0; i < kPolicyFeatures; ++i) {
    const double sd = std::sqrt(var[i]);
    stddev[i] = sd > 1e-12 * (1.0 + std::abs(mean[i])) ? sd : 1.0;
  }
  count = raw.size();
  frozen = true;
}

void FeatureScaler::observe(const Eigen::VectorXd& raw) {
  if (frozen) return;
  ++count;
  const Eigen::VectorXd d = raw - mean;
  mean += d / static_cast<double>(count);
  m2_ += d.cwiseProduct(raw - mean);
  for (Eigen::Index i = 0; i < kPolicyFeatures; ++i) {
    const double sd = count > 1 ? std::sqrt(m2_[i] / static_cast<double>(count)) : 0.0;
    stddev[i] = sd > 1e-12 * (1.0 + std::abs(mean[i])) ? sd : 1.0;
  }
  if (count >= freeze_after) frozen = true;
}

Eigen::VectorXd FeatureScaler::apply(const Eigen::VectorXd& raw) const {
  if (raw.size() != kPolicyFeatures) throw DomainError("policy feature dimension mismatch");
  return (raw - mean).cwiseQuotient(stddev);
}

PolicyBundle::PolicyBundle(const ConfigSpace& space, std::uint64_t seed, int hidden, int layers) {
  const std::vector<int> widths(static_cast<std::size_t>(layers), hidden);
  for (int k = 0; k < 4; ++k) {
    Rng rng(hash_combine(seed, static_cast<std::uint64_t>(k)));
    heads[k] = Mlp(kPolicyFeatures, widths, space.level_count(kKnobs[k]), rng);
  }
}

Eigen::VectorXd PolicyBundle::featurize(const CounterVector& h) const {
  return scaler.apply(raw_policy_features(h));
}

std::array<Eigen::VectorXd, 4> PolicyBundle::probabilities(const Eigen::VectorXd& x) const {
  std::array<Eigen::VectorXd, 4> out;
  for (int k = 0; k < 4; ++k) out[k] = softmax(heads[k].forward(x)).col(0);
  return out;
}

KnobLevels PolicyBundle::predict_levels(const Eigen::VectorXd& x) const {
  KnobLevels out{};
  for (int k = 0; k < 4; ++k) {
    const Eigen::VectorXd logits = heads[k].forward(x).col(0);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < logits.size(); ++i)
      if (logits[i] > logits[arg]) arg = i;
    out[k] = static_cast<int>(arg);
  }
  return out;
}

KnobLevels PolicyBundle::predict_levels(const CounterVector& h) const {
  return predict_levels(featurize(h));
}

Configuration PolicyBundle::predict(const CounterVector& h, const ConfigSpace& space) const {
  return space.from_level_indices(predict_levels(h));
}

void PolicyBundle::train(const std::vector<Example>& data, const TrainOptions& opts) {
  if (data.empty()) throw DomainError("training needs at least one example");
  if (opts.batch < 1 || opts.epochs < 0) throw DomainError("invalid training options");
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(kPolicyFeatures, n);
  for (Eigen::Index i = 0; i < n; ++i) X.col(i) = normalize(data[static_cast<std::size_t>(i)].raw);

  for (int k = 0; k < 4; ++k) {
    Mlp& net = heads[k];
    Adam adam(net, opts.learning_rate);
    Rng rng(hash_combine(opts.seed, 0x100u + static_cast<std::uint64_t>(k)));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Mlp::Cache cache;
    Eigen::MatrixXd dlogits;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += opts.batch) {
        const std::size_t len = std::min(opts.batch, order.size() - start);
        Eigen::MatrixXd xb(kPolicyFeatures, static_cast<Eigen::Index>(len));
        std::vector<int> yb(len);
        for (std::size_t j = 0; j < len; ++j) {
          xb.col(static_cast<Eigen::Index>(j)) = X.col(order[start + j]);
          yb[j] = data[static_cast<std::size_t>(order[start + j])].label[k];
        }
        const Eigen::MatrixXd logits = net.forward(xb, cache);
        softmax_cross_entropy(logits, yb, &dlogits);
        adam.step(net, net.backward(cache, dlogits));
      }
    }
  }
}

double PolicyBundle::exact_match(const std::vector<Example>& data) const {
  if (data.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& e : data) hit += predict_levels(normalize(e.raw)) == e.label;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

void PolicyBundle::zero_output_layers() {
  for (auto& h : heads) {
    h.W.back().setZero();
    h.b.back().setZero();
  }
}

void PolicyBundle::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "ilgov-policy 1\n";
  os << "scaler " << (scaler.frozen ? 1 : 0) << ' ' << scaler.count << ' '
     << scaler.freeze_after << '\n';
  detail::put_vector(os, "mean", scaler.mean);
  detail::put_vector(os, "stddev", scaler.stddev);
  for (int k = 0; k < 4; ++k) {
    os << "head " << knob_name(kKnobs[k]) << '\n';
    heads[k].write(os);
  }
  if (!os) throw IoError("write failed for " + path.string());
}

PolicyBundle PolicyBundle::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  detail::expect(is, "ilgov-policy");
  if (detail::get_long(is) != 1) throw FormatError("unsupported policy checkpoint version");
  PolicyBundle b;
  detail::expect(is, "scaler");
  b.scaler.frozen = detail::get_long(is) != 0;
  b.scaler.count = static_cast<std::size_t>(detail::get_long(is));
  b.scaler.freeze_after = static_cast<std::size_t>(detail::get_long(is));
  b.scaler.mean = detail::get_vector(is, "mean");
  b.scaler.stddev = detail::get_vector(is, "stddev");
  if (b.scaler.mean.size() != kPolicyFeatures || b.scaler.stddev.size() != kPolicyFeatures)
    throw FormatError("policy scaler dimension mismatch");
  for (int k = 0; k < 4; ++k) {
    detail::expect(is, "head");
    detail::expect(is, std::string(knob_name(kKnobs[k])));
    b.heads[k] = Mlp::read(is);
    if (b.heads[k].inputs() != kPolicyFeatures) throw FormatError("policy head input mismatch");
  }
  return b;
}

void TrainingBuffer::push(Example e) {
  if (full()) throw DomainError("training buffer is full; retrain before adding entries");
  entries_.push_back(std::move(e));
}

bool observe_and_maybe_buffer(const PolicyBundle& bundle, TrainingBuffer& buffer,
                              const CounterVector& state, const Configuration& oracle,
                              const ConfigSpace& space) {
  const Eigen::VectorXd raw = raw_policy_features(state);
  const KnobLevels predicted = bundle.predict_levels(bundle.normalize(raw));
  const KnobLevels target = space.level_indices(oracle);
  if (predicted == target) return false;
  buffer.push({raw, target});
  return true;
}

PolicyBundle retrain_online(const PolicyBundle& bundle, TrainingBuffer& buffer,
                            const OnlineTrainOptions& opts, std::uint64_t seed) {
  PolicyBundle next = bundle;
  if (buffer.size() > 0) {
    TrainOptions t;
    t.learning_rate = opts.learning_rate;
    t.batch = opts.batch;
    t.epochs = opts.epochs;
    t.seed = seed;
    next.train(buffer.entries(), t);
  }
  buffer.clear();
  return next;
}

std::vector<Example> rollout_examples(const Workload& w, const std::vector<OracleLabel>& labels,
                                      const ConfigSpace& space, const PolicyBundle* policy) {
  if (labels.size() != w.epochs.size()) throw DomainError("labels do not match workload epochs");
  std::vector<Example> out;
  out.reserve(w.epochs.size());
  Configuration prev = space.min_config();
  for (std::size_t k = 0; k < w.epochs.size(); ++k) {
    const CounterVector state = w.execute(k, prev).counters;
    Example e{raw_policy_features(state), space.level_indices(labels[k].config)};
    prev = policy ? space.from_level_indices(policy->predict_levels(policy->normalize(e.raw)))
                  : labels[k].config;
    out.push_back(std::move(e));
  }
  return out;
}

OfflineIlResult train_offline(const std::vector<const Workload*>& suite, const ConfigSpace& space,
                              const OfflineIlOptions& opts) {
  if (suite.empty()) throw DomainError("offline training needs at least one workload");
  std::vector<std::vector<OracleLabel>> labels;
  for (const Workload* w : suite) labels.push_back(offline_oracle(*w, space, opts.beta));

  OfflineIlResult r;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    auto ex = rollout_examples(*suite[i], labels[i], space, nullptr);
    r.dataset.insert(r.dataset.end(), ex.begin(), ex.end());
  }
  if (r.dataset.empty()) throw DomainError("offline training suite has no epochs");
  r.exact_examples = r.dataset.size();

  FeatureScaler scaler;
  {
    std::vector<Eigen::VectorXd> raw;
    for (const auto& e : r.dataset) raw.push_back(e.raw);
    scaler.fit(raw);
  }
  auto fresh = [&] {
    PolicyBundle b(space, opts.train.seed, opts.hidden, opts.layers);
    b.scaler = scaler;
    return b;
  };
  r.bundle = fresh();
  r.bundle.train(r.dataset, opts.train);

  for (int round = 0; round < opts.aggregation_rounds; ++round) {
    for (std::size_t i = 0; i < suite.size(); ++i) {
      auto ex = rollout_examples(*suite[i], labels[i], space, &r.bundle);
      r.dataset.insert(r.dataset.end(), ex.begin(), ex.end());
    }
    r.bundle = fresh();
    r.bundle.train(r.dataset, opts.train);
  }
  return r;
}

}  // namespace ilgov
