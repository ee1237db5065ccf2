#include "ilgov/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "ilgov/control.hpp"
#include "ilgov/errors.hpp"
#include "ilgov/governors.hpp"
#include "ilgov/models.hpp"
#include "ilgov/oracle.hpp"
#include "ilgov/policy.hpp"
#include "ilgov/rl.hpp"
#include "ilgov/rng.hpp"

namespace ilgov {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open " + p.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

json knobs_json(const KnobScores& s) {
  json j;
  for (Knob k : kKnobs) j[std::string(knob_name(k))] = s[static_cast<int>(k)];
  return j;
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

// NaN ratios (no reference log) are written as null.
json ratio_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::map<std::string, KnobScores> suite_accuracy(const std::vector<Workload>& suite,
                                                 const ConfigSpace& space,
                                                 const PolicyBundle& policy, double beta) {
  std::map<std::string, KnobScores> out;
  for (const auto& w : suite) {
    const Stream s = Stream::of(w);
    out[w.name] = run_accuracy(run_policy(s, space, policy), offline_oracle(s, space, beta), space).mean;
  }
  return out;
}

PolicyBundle random_policy(const ExperimentSpec& spec, const ConfigSpace& space) {
  return PolicyBundle(space, hash_combine(spec.seed, 0x7a11), spec.offline.hidden,
                      spec.offline.layers);
}

RlsSettings rls_settings(const ExperimentSpec& spec) {
  return {spec.online.forgetting, spec.online.p0, spec.online.trace_cap};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const ControllerResult* SimulationSummary::find(std::string_view name) const {
  for (const auto& c : controllers)
    if (c.controller == name) return &c;
  return nullptr;
}

std::vector<fs::path> cmd_characterize(const ExperimentSpec& spec, bool include_evaluation) {
  validate(spec);
  const RunPaths paths{spec.output};
  make_dirs(paths.traces());
  write_text(paths.root / "spec.json", spec_to_json(spec));

  const ConfigSpace space;
  const auto configs = space.enumerate();
  std::vector<fs::path> written;
  auto sweep = [&](const std::vector<WorkloadSpec>& suite) {
    for (const auto& w : build_suite(suite, spec.generator())) {
      const fs::path p = paths.traces() / (w.name + ".csv");
      save_trace(w, configs, p);
      written.push_back(p);
    }
  };
  sweep(spec.training);
  if (include_evaluation) sweep(spec.evaluation);
  return written;
}

OfflineSummary cmd_train_offline(const ExperimentSpec& spec, bool no_offline) {
  validate(spec);
  const RunPaths paths{spec.output};
  std::vector<std::string> missing;
  for (const auto& w : spec.training)
    if (!fs::exists(paths.traces() / (w.name + ".csv"))) missing.push_back(w.name + ".csv");
  if (!missing.empty())
    throw IoError(fmt::format("missing traces in {}: {}", paths.traces().string(),
                              fmt::join(missing, ", ")));

  std::vector<Workload> suite;
  for (const auto& w : spec.training) {
    Workload t = load_trace(paths.traces() / (w.name + ".csv"));
    t.name = w.name;
    suite.push_back(std::move(t));
  }

  const ConfigSpace space;
  std::vector<EpochObservation> obs;
  for (const auto& w : suite)
    for (std::size_t k = 0; k < w.epochs.size(); k += spec.offline.characterization_stride)
      for (std::size_t i = 0; i < space.size(); ++i) obs.push_back(w.execute(k, space.at(i)));
  OfflineFitReport fit;
  const PlatformModels models = PlatformModels::fit_offline(obs, {}, rls_settings(spec), &fit);

  OfflineSummary summary;
  summary.power_fit_error = fit.power_mean_rel_error;
  summary.time_fit_error = fit.time_mean_rel_error;
  summary.fit_samples = fit.samples;
  summary.random_init = no_offline;

  PolicyBundle policy;
  if (no_offline) {
    policy = random_policy(spec, space);
  } else {
    OfflineIlOptions opts;
    opts.train = {spec.offline.learning_rate, spec.offline.batch, spec.offline.epochs, spec.seed};
    opts.aggregation_rounds = spec.offline.aggregation_rounds;
    opts.hidden = spec.offline.hidden;
    opts.layers = spec.offline.layers;
    opts.beta = spec.beta;
    std::vector<const Workload*> ptrs;
    for (const auto& w : suite) ptrs.push_back(&w);
    OfflineIlResult r = train_offline(ptrs, space, opts);
    summary.dataset = r.dataset.size();
    policy = std::move(r.bundle);
  }
  summary.training_accuracy = suite_accuracy(suite, space, policy, spec.beta);

  make_dirs(paths.checkpoints());
  make_dirs(paths.reports());
  policy.save(paths.policy_checkpoint());
  models.save(paths.models_checkpoint());

  json rep;
  rep["random_init"] = no_offline;
  rep["fit"] = {{"samples", fit.samples},
                {"power_mean_rel_error", fit.power_mean_rel_error},
                {"time_mean_rel_error", fit.time_mean_rel_error},
                {"power_ridge", fit.power_ridge},
                {"time_ridge", fit.time_ridge}};
  rep["dataset"] = summary.dataset;
  json acc = json::object();
  for (const auto& [name, s] : summary.training_accuracy) acc[name] = knobs_json(s);
  rep["training_accuracy"] = acc;
  write_json(paths.reports() / "offline.json", rep);
  return summary;
}

SimulationSummary cmd_simulate(const ExperimentSpec& spec, bool no_offline) {
  validate(spec);
  const RunPaths paths{spec.output};
  const ConfigSpace space;

  PolicyBundle policy;
  PlatformModels models(FeatureConfig{}, rls_settings(spec));
  if (no_offline) {
    policy = random_policy(spec, space);
  } else {
    std::vector<std::string> missing;
    for (const auto& p : {paths.policy_checkpoint(), paths.models_checkpoint()})
      if (!fs::exists(p)) missing.push_back(p.string());
    if (!missing.empty())
      throw IoError(fmt::format("missing checkpoints (run train-offline first): {}",
                                fmt::join(missing, ", ")));
    policy = PolicyBundle::load(paths.policy_checkpoint());
    models = PlatformModels::load(paths.models_checkpoint());
  }

  for (const auto& d : {paths.logs(), paths.reports(), paths.plots(), paths.checkpoints()})
    make_dirs(d);
  write_text(paths.root / "spec.json", spec_to_json(spec));

  const GeneratorOptions gen = spec.generator();
  const std::vector<Workload> eval = build_suite(spec.evaluation, gen);
  const std::vector<std::string> order = materialize_sequence(spec);
  std::vector<const Workload*> ptrs;
  for (const auto& name : order)
    ptrs.push_back(&*std::find_if(eval.begin(), eval.end(),
                                  [&](const Workload& w) { return w.name == name; }));
  const Stream stream = Stream::sequence(ptrs, 1, spec.sequence.segment);
  {
    json seq;
    seq["segment"] = spec.sequence.segment;
    seq["epochs"] = stream.size();
    seq["order"] = order;
    write_json(paths.root / "sequence.json", seq);
  }

  const std::vector<OracleLabel> reference = offline_oracle(stream, space, spec.beta);
  save_labels(reference, paths.logs() / "reference_labels.csv");

  const OnlineOracleOptions search{spec.budget, spec.beta};
  SimulationSummary summary;
  summary.epochs = stream.size();
  std::map<std::string, DecisionLog> logs;
  json timing = json::object();
  auto wants = [&](std::string_view c) {
    return std::find(spec.controllers.begin(), spec.controllers.end(), c) != spec.controllers.end();
  };

  for (const auto& name : spec.controllers) {
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "online-il") {
      OnlineIlOptions opts;
      opts.oracle = search;
      opts.buffer_capacity = spec.buffer_capacity;
      opts.train = {spec.online.learning_rate, spec.online.batch, spec.online.epochs};
      opts.seed = spec.seed;
      OnlineIlRun run = run_online_il(stream, space, policy, models, opts);
      save_labels(run.online_labels, paths.logs() / "online_labels.csv");
      run.policy.save(paths.checkpoints() / "policy-online.ckpt");
      run.models.save(paths.checkpoints() / "models-online.ckpt");
      summary.il_disagreements = run.disagreements;
      const auto training = build_suite(spec.training, gen);
      summary.training_accuracy_after = suite_accuracy(training, space, run.policy, spec.beta);
      logs[name] = std::move(run.decisions);
    } else if (name == "rl") {
      RlOptions opts;
      opts.alpha = spec.rl.alpha;
      opts.gamma = spec.rl.gamma;
      opts.beta = spec.beta;
      opts.epsilon = {spec.rl.epsilon, spec.rl.epsilon_decay, spec.rl.epsilon_floor};
      opts.seed = hash_combine(spec.seed, 0x41);
      std::unique_ptr<QLearner> learner;
      if (spec.rl.variant == "dqn")
        learner = std::make_unique<DqnLearner>(space.size(), policy.scaler,
                                               hash_combine(spec.seed, 0xd9), spec.offline.hidden,
                                               spec.offline.layers, spec.rl.learning_rate);
      else
        learner = std::make_unique<QTable>(space.size());
      RlRun run = run_rl_control(stream, space, *learner, opts);
      run.decisions.controller = name;
      save_rl_log(run.log, paths.logs() / "rl_updates.csv");
      logs[name] = std::move(run.decisions);
    } else if (name == "static-offline") {
      logs[name] = run_policy(stream, space, policy, name);
    } else if (name == "models-only") {
      ModelsOnlyRun run = models_only_control(stream, space, models, search);
      run.decisions.controller = name;
      logs[name] = std::move(run.decisions);
    } else if (name == "powersave") {
      logs[name] = run_fixed(stream, powersave(space), name);
    } else if (name == "performance") {
      logs[name] = run_fixed(stream, performance(space), name);
    } else if (name == "oracle") {
      logs[name] = run_labels(stream, reference, name);
    }
    timing[name] = seconds_since(t0);
  }
  for (const auto& [name, log] : logs) log.save(paths.logs() / (name + ".csv"));

  // Ratio references are computed even when not listed as controllers.
  DecisionLog ref_ps = wants("powersave") ? DecisionLog{} : run_fixed(stream, powersave(space), "powersave");
  DecisionLog ref_or = wants("oracle") ? DecisionLog{} : run_labels(stream, reference, "oracle");
  auto ratio_logs = [&] {
    std::vector<const DecisionLog*> v;
    for (const auto& name : spec.controllers) v.push_back(&logs.at(name));
    if (!wants("powersave")) v.push_back(&ref_ps);
    if (!wants("oracle")) v.push_back(&ref_or);
    return v;
  }();

  json accuracy = json::object();
  for (const auto& name : spec.controllers) {
    const DecisionLog& log = logs.at(name);
    ControllerResult r;
    r.controller = name;
    r.accuracy = run_accuracy(log, reference, space, spec.accuracy_window, spec.accuracy_threshold);
    for (const auto& row : log.rows) {
      r.totals.energy += row.energy;
      r.totals.time += row.time;
      r.retrains += row.retrained ? 1 : 0;
      r.oracle_evaluations += row.oracle_evals;
    }
    r.model_updates = log.rows.empty() ? 0 : log.rows.back().model_updates;
    if (name == "online-il") summary.il_convergence = r.accuracy.convergence;

    json a;
    a["mean"] = knobs_json(r.accuracy.mean);
    a["mean_all"] = r.accuracy.mean_all();
    a["final_rolling"] = knobs_json(r.accuracy.final_rolling());
    a["window"] = r.accuracy.window;
    a["threshold"] = r.accuracy.threshold;
    a["convergence"] = optional_json(r.accuracy.convergence);
    json kc;
    for (Knob k : kKnobs)
      kc[std::string(knob_name(k))] = optional_json(r.accuracy.knob_convergence[static_cast<int>(k)]);
    a["knob_convergence"] = kc;
    accuracy[name] = a;
    summary.controllers.push_back(std::move(r));
  }

  auto energy_rows = [&](std::size_t first) {
    std::vector<EnergyRow> rows = energy_report(ratio_logs, first);
    rows.erase(std::remove_if(rows.begin(), rows.end(),
                              [&](const EnergyRow& e) { return !wants(e.controller); }),
               rows.end());
    return rows;
  };
  auto rows_json = [](const std::vector<EnergyRow>& rows) {
    json a = json::array();
    for (const auto& e : rows)
      a.push_back({{"controller", e.controller},
                   {"energy_j", e.energy},
                   {"time_s", e.time},
                   {"energy_vs_powersave", ratio_json(e.energy_vs_powersave)},
                   {"time_vs_powersave", ratio_json(e.time_vs_powersave)},
                   {"energy_vs_oracle", ratio_json(e.energy_vs_oracle)},
                   {"time_vs_oracle", ratio_json(e.time_vs_oracle)}});
    return a;
  };
  summary.energy = energy_rows(0);
  json energy;
  energy["all_epochs"] = rows_json(summary.energy);
  if (summary.il_convergence) {
    energy["after_il_convergence"] = {{"first_epoch", *summary.il_convergence},
                                      {"rows", rows_json(energy_rows(*summary.il_convergence))}};
  } else {
    energy["after_il_convergence"] = nullptr;
  }

  json workloads = json::object();
  const DecisionLog& ps_log = wants("powersave") ? logs.at("powersave") : ref_ps;
  const auto ps_totals = totals_by_workload(ps_log);
  for (const auto& name : spec.controllers) {
    json per = json::object();
    for (const auto& [w, t] : totals_by_workload(logs.at(name))) {
      const Totals& base = ps_totals.at(w);
      per[w] = {{"energy_j", t.energy},
                {"time_s", t.time},
                {"energy_vs_powersave", t.energy / base.energy},
                {"time_vs_powersave", t.time / base.time}};
    }
    workloads[name] = per;
  }

  json online = json::object();
  if (const ControllerResult* il = summary.find("online-il")) {
    online["disagreements"] = summary.il_disagreements;
    online["retrains"] = il->retrains;
    online["buffer_capacity"] = spec.buffer_capacity;
    online["oracle_evaluations"] = il->oracle_evaluations;
    online["model_updates"] = il->model_updates;
    json after = json::object();
    for (const auto& [w, s] : summary.training_accuracy_after) after[w] = knobs_json(s);
    online["training_accuracy_after"] = after;
  }

  write_json(paths.reports() / "accuracy.json", accuracy);
  write_json(paths.reports() / "energy.json", energy);
  write_json(paths.reports() / "workloads.json", workloads);
  write_json(paths.reports() / "online.json", online);
  // Wall-clock numbers are machine dependent, so they stay outside reports/.
  write_json(paths.root / "timing.json", timing);

  {
    std::string csv = "controller,epoch,n_big,n_little,f_big,f_little,rolling_start\n";
    for (const auto& r : summary.controllers) {
      const auto& acc = r.accuracy;
      for (std::size_t k = 0; k < acc.per_epoch.size(); ++k) {
        const auto& p = acc.per_epoch[k];
        csv += fmt::format("{},{},{},{},{},{},{}\n", r.controller, k, p[0], p[1], p[2], p[3],
                           k < acc.rolling.size() ? "1" : "0");
      }
    }
    write_text(paths.plots() / "accuracy_vs_epoch.csv", csv);

    std::string roll = "controller,window_start,n_big,n_little,f_big,f_little\n";
    for (const auto& r : summary.controllers)
      for (std::size_t s = 0; s < r.accuracy.rolling.size(); ++s) {
        const auto& p = r.accuracy.rolling[s];
        roll += fmt::format("{},{},{},{},{},{}\n", r.controller, s, p[0], p[1], p[2], p[3]);
      }
    write_text(paths.plots() / "rolling_accuracy.csv", roll);

    std::string bars = "controller,energy_vs_powersave,time_vs_powersave,energy_vs_oracle\n";
    for (const auto& e : summary.energy)
      bars += fmt::format("{},{},{},{}\n", e.controller, e.energy_vs_powersave,
                          e.time_vs_powersave, e.energy_vs_oracle);
    write_text(paths.plots() / "energy_bars.csv", bars);
  }
  return summary;
}

fs::path cmd_report(const fs::path& run_dir) {
  const RunPaths paths{run_dir};
  const fs::path spec_path = run_dir / "spec.json";
  std::vector<fs::path> required{spec_path, run_dir / "sequence.json",
                                 paths.reports() / "accuracy.json", paths.reports() / "energy.json",
                                 paths.reports() / "online.json"};
  ExperimentSpec spec;
  if (fs::exists(spec_path)) {
    std::ifstream is(spec_path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    spec = parse_spec(ss.str());
    for (const auto& c : spec.controllers) required.push_back(paths.logs() / (c + ".csv"));
  }
  std::vector<std::string> missing;
  for (const auto& p : required)
    if (!fs::exists(p)) missing.push_back(p.lexically_relative(run_dir).generic_string());
  if (!missing.empty())
    throw IoError(fmt::format("incomplete run in {}, missing: {}", run_dir.string(),
                              fmt::join(missing, ", ")));

  const json accuracy = read_json(paths.reports() / "accuracy.json");
  const json energy = read_json(paths.reports() / "energy.json");
  const json online = read_json(paths.reports() / "online.json");
  const json sequence = read_json(run_dir / "sequence.json");

  json controllers = json::array();
  for (const auto& c : spec.controllers) {
    const DecisionLog log = DecisionLog::load(paths.logs() / (c + ".csv"), c);
    std::size_t evals = 0, retrains = 0;
    for (const auto& r : log.rows) {
      evals += r.oracle_evals;
      retrains += r.retrained ? 1 : 0;
    }
    json e = nullptr;
    for (const auto& row : energy.at("all_epochs"))
      if (row.at("controller") == c) e = row;
    if (!accuracy.contains(c) || e.is_null())
      throw FormatError("reports do not cover controller '" + c + "'");
    const json& a = accuracy.at(c);
    controllers.push_back({{"controller", c},
                           {"epochs", log.rows.size()},
                           {"accuracy", a.at("mean")},
                           {"final_rolling_accuracy", a.at("final_rolling")},
                           {"convergence_epoch", a.at("convergence")},
                           {"energy_j", e.at("energy_j")},
                           {"time_s", e.at("time_s")},
                           {"energy_vs_powersave", e.at("energy_vs_powersave")},
                           {"time_vs_powersave", e.at("time_vs_powersave")},
                           {"energy_vs_oracle", e.at("energy_vs_oracle")},
                           {"retrains", retrains},
                           {"oracle_evaluations", evals}});
  }
  json summary;
  summary["schema_version"] = kSpecSchemaVersion;
  summary["seed"] = spec.seed;
  summary["beta"] = spec.beta;
  summary["budget"] = spec.budget;
  summary["epochs"] = sequence.at("epochs");
  summary["controllers"] = controllers;
  summary["online_il"] = online;
  summary["after_il_convergence"] = energy.at("after_il_convergence");
  const fs::path out = run_dir / "summary.json";
  write_json(out, summary);
  return out;
}

}  // namespace ilgov
