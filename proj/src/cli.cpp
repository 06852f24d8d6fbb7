#include "uhpnf/cli.hpp"

#include <sstream>

#include "uhpnf/baselines.hpp"
#include "uhpnf/errors.hpp"
#include "uhpnf/trace_io.hpp"

namespace uhpnf {

namespace {

namespace fs = std::filesystem;

std::vector<fs::path> agent_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (int i = 0;; ++i) {
    const fs::path p = dir / ("agent_" + std::to_string(i) + ".uhpf");
    if (!fs::exists(p)) break;
    files.push_back(p);
  }
  if (files.empty()) throw IoError("no agent_<i>.uhpf files in " + dir.string());
  return files;
}

}  // namespace

ModelArg parse_model_arg(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw DomainError("model argument '" + text + "' is not name=path[,path...]");
  ModelArg arg{text.substr(0, eq), {}};
  if (arg.name.find(',') != std::string::npos) throw DomainError("model name '" + arg.name + "' contains a comma");
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw DomainError("model argument '" + text + "' has an empty path");
    arg.paths.emplace_back(item);
  }
  return arg;
}

Model load_model(const ModelArg& arg) {
  std::vector<fs::path> files;
  for (const auto& p : arg.paths) {
    if (fs::is_directory(p)) {
      const auto more = agent_files(p);
      files.insert(files.end(), more.begin(), more.end());
    } else {
      files.push_back(p);
    }
  }
  Model m{arg.name, {}};
  for (const auto& f : files) m.snapshots.push_back(read_snapshot(f));
  return m;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "episode,epsilon,mean_reward,loss\n";
  for (const auto& c : curve)
    out += std::to_string(c.episode) + ',' + format_double(c.epsilon) + ',' + format_double(c.mean_reward) + ',' +
           format_double(c.loss) + '\n';
  return out;
}

TrainResult cmd_train(const RunConfig& config, TrainingMode mode, const fs::path& out_dir) {
  config.validate();
  TrainResult r = train(config.train, config.scenario, mode, config.federation, config.scenario.seed);
  fs::create_directories(out_dir);
  write_snapshot(out_dir / "snapshot.uhpf", r.snapshot);
  for (std::size_t i = 0; i < r.agents.size(); ++i)
    write_snapshot(out_dir / ("agent_" + std::to_string(i) + ".uhpf"), r.agents[i]);
  write_text_atomic(out_dir / "curve.csv", curve_csv(r.curve));
  return r;
}

PolicyFactory resolve_policy(const std::string& name, const std::vector<Model>& models, int n) {
  for (const auto& m : models)
    if (m.name == name) return model_policy(m, n);
  if (name == "greedy" || name == "tdma" || name == "random") {
    const BaselineKind kind = parse_baseline(name);
    return [kind](std::uint64_t seed) { return make_static_policy(kind, seed); };
  }
  throw DomainError("unknown policy '" + name + "': use greedy, tdma, random or a --model name");
}

std::string cmd_compare(const RunConfig& config, const std::vector<std::string>& policies,
                        const std::vector<Model>& models, const std::vector<double>& epsilons) {
  config.validate();
  if (policies.empty() || epsilons.empty()) throw DomainError("compare: need at least one policy and one epsilon");
  std::vector<PolicyFactory> factories;
  for (const auto& p : policies) factories.push_back(resolve_policy(p, models, config.scenario.n));
  std::string out = "policy,epsilon,mean_concurrent,stddev\n";
  for (std::size_t k = 0; k < policies.size(); ++k) {
    for (double eps : epsilons) {
      Scenario s = config.scenario;
      s.episode.epsilon_fail = eps;
      const EvalMetrics m = evaluate_policy(factories[k], s);
      out += policies[k] + ',' + format_double(eps) + ',' + format_double(m.concurrent.mean) + ',' +
             format_double(m.concurrent.stddev) + '\n';
    }
  }
  return out;
}

std::string cmd_sweep_objectives(const RunConfig& config, const std::vector<Model>& models, const std::vector<int>& ns) {
  config.validate();
  if (models.empty() || ns.empty()) throw DomainError("sweep-objectives: need at least one model and one n");
  std::string out = "model,n,capacity_kb,fairness\n";
  for (const auto& model : models) {
    for (int n : ns) {
      Scenario s = config.scenario;
      s.n = n;
      const EvalMetrics m = evaluate(model, s);
      out += model.name + ',' + std::to_string(n) + ',' + format_double(m.capacity_kb.mean) + ',' +
             format_double(m.fairness.mean) + '\n';
    }
  }
  return out;
}

std::string cmd_export(const fs::path& trace) { return trace_csv(read_trace(trace)); }

std::vector<EpisodeTrace> cmd_simulate(const RunConfig& config, const std::string& policy, const std::vector<Model>& models) {
  config.validate();
  return simulate(resolve_policy(policy, models, config.scenario.n), config.scenario);
}

std::string what_if_csv(const WhatIfReport& report) {
  std::string out =
      "scenario,objective,rank,model,concurrent_mean,concurrent_std,capacity_kb_mean,capacity_kb_std,fairness_mean,"
      "fairness_std\n";
  std::size_t prev = report.cells.empty() ? 0 : report.cells.front().scenario_index;
  int rank = 0;
  for (const auto& c : report.cells) {
    rank = c.scenario_index == prev ? rank + 1 : 1;
    prev = c.scenario_index;
    const auto& m = c.metrics;
    out += std::to_string(c.scenario_index) + ',' + to_string(report.scenarios[c.scenario_index].episode.objective) + ',' +
           std::to_string(rank) + ',' + c.model + ',' + format_double(m.concurrent.mean) + ',' +
           format_double(m.concurrent.stddev) + ',' + format_double(m.capacity_kb.mean) + ',' +
           format_double(m.capacity_kb.stddev) + ',' + format_double(m.fairness.mean) + ',' +
           format_double(m.fairness.stddev) + '\n';
  }
  return out;
}

void cmd_register(const fs::path& registry, Objective objective, const fs::path& snapshot, const std::string& provenance) {
  ModelRegistry reg = fs::exists(registry / "manifest.csv") ? ModelRegistry::load(registry) : ModelRegistry{};
  reg.put(objective, read_snapshot(snapshot), provenance);
  reg.save(registry);
}

}  // namespace uhpnf
