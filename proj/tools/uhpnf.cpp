#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uhpnf/cli.hpp"
#include "uhpnf/errors.hpp"
#include "uhpnf/trace_io.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3, kNumerical = 4 };

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> episodes;
  std::vector<std::string> models;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value configuration file");
    app->add_option("--set", sets, "override one key, key=value (repeatable)");
    app->add_option("--seed", seed, "scenario and training seed");
    app->add_option("--episodes", episodes, "training episodes");
    app->add_option("--model", models, "name=path[,path...] (repeatable)");
    app->add_option("--out", out, "output path")->required();
  }

  uhpnf::RunConfig run_config() const {
    uhpnf::RunConfig c = config.empty() ? uhpnf::RunConfig{} : uhpnf::RunConfig::load(config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw uhpnf::ConfigError(0, "--set '" + s + "' is not key=value");
      c.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) c.scenario.seed = *seed;
    if (episodes) c.train.episodes = *episodes;
    c.validate();
    return c;
  }

  std::vector<uhpnf::Model> loaded_models() const {
    std::vector<uhpnf::Model> out_models;
    for (const auto& m : models) out_models.push_back(uhpnf::load_model(uhpnf::parse_model_arg(m)));
    return out_models;
  }
};

int fail(Exit code, const std::string& what) {
  std::cerr << "uhpnf: " << what << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underwater acoustic network simulator, recurrent Q-learning power control and federated training"};
  app.require_subcommand(1);

  Common train_opts, compare_opts, sweep_opts, sim_opts, whatif_opts;
  std::string mode = "uhpnf";
  auto* train_cmd = app.add_subcommand("train", "train per-node Q-networks; writes snapshots and curve.csv into --out");
  train_opts.attach(train_cmd);
  train_cmd->add_option("--mode", mode, "uhpnf or iql")->check(CLI::IsMember({"uhpnf", "iql"}));

  std::vector<std::string> policies;
  std::vector<double> epsilons{0.0, 0.01, 0.1, 0.2};
  std::optional<int> runs;
  auto* compare_cmd = app.add_subcommand("compare", "mean concurrent links per policy and failure probability");
  compare_opts.attach(compare_cmd);
  compare_cmd->add_option("--policies", policies, "greedy, tdma, random or model names")->delimiter(',')->required();
  compare_cmd->add_option("--epsilons", epsilons, "failure probabilities")->delimiter(',');
  compare_cmd->add_option("--runs", runs, "evaluation runs per cell");

  std::vector<int> ns{3, 4, 5};
  auto* sweep_cmd = app.add_subcommand("sweep-objectives", "capacity and fairness of each model over network sizes");
  sweep_opts.attach(sweep_cmd);
  sweep_cmd->add_option("--n", ns, "network sizes")->delimiter(',');

  std::string trace_in, export_out;
  auto* export_cmd = app.add_subcommand("export", "per-slot CSV of a trace file");
  export_cmd->add_option("--trace", trace_in, "JSON trace")->required();
  export_cmd->add_option("--out", export_out, "CSV path")->required();

  std::string sim_policy;
  std::string sim_csv;
  auto* sim_cmd = app.add_subcommand("simulate", "run one policy and write the JSON trace to --out");
  sim_opts.attach(sim_cmd);
  sim_cmd->add_option("--policy", sim_policy, "greedy, tdma, random or a model name")->required();
  sim_cmd->add_option("--csv", sim_csv, "also write the per-slot CSV here");

  std::vector<std::string> scenario_files;
  auto* whatif_cmd = app.add_subcommand("what-if", "evaluate every model on every scenario, ranked per scenario");
  whatif_opts.attach(whatif_cmd);
  whatif_cmd->add_option("--scenario", scenario_files, "scenario config file (repeatable); default: --config alone");

  std::string registry, objective, snapshot, provenance;
  auto* register_cmd = app.add_subcommand("register", "add a snapshot to an objective-indexed model registry");
  register_cmd->add_option("--registry", registry, "registry directory")->required();
  register_cmd->add_option("--objective", objective, "concurrent, capacity or fairness")->required();
  register_cmd->add_option("--snapshot", snapshot, "UHPF file")->required();
  register_cmd->add_option("--provenance", provenance, "free-text note stored in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) {
      const auto r = uhpnf::cmd_train(train_opts.run_config(), uhpnf::parse_training_mode(mode), train_opts.out);
      if (!r.curve.empty()) std::cout << "final mean reward " << uhpnf::format_double(r.curve.back().mean_reward) << '\n';
    } else if (*compare_cmd) {
      auto c = compare_opts.run_config();
      if (runs) c.scenario.runs = *runs;
      uhpnf::write_text_atomic(compare_opts.out, uhpnf::cmd_compare(c, policies, compare_opts.loaded_models(), epsilons));
    } else if (*sweep_cmd) {
      uhpnf::write_text_atomic(sweep_opts.out,
                               uhpnf::cmd_sweep_objectives(sweep_opts.run_config(), sweep_opts.loaded_models(), ns));
    } else if (*export_cmd) {
      uhpnf::write_text_atomic(export_out, uhpnf::cmd_export(trace_in));
    } else if (*sim_cmd) {
      const auto traces = uhpnf::cmd_simulate(sim_opts.run_config(), sim_policy, sim_opts.loaded_models());
      uhpnf::write_trace(sim_opts.out, traces);
      if (!sim_csv.empty()) uhpnf::write_text_atomic(sim_csv, uhpnf::trace_csv(traces));
    } else if (*whatif_cmd) {
      const auto base = whatif_opts.run_config();
      std::vector<uhpnf::Scenario> scenarios;
      if (scenario_files.empty()) scenarios.push_back(base.scenario);
      for (const auto& f : scenario_files) {
        Common one = whatif_opts;
        one.config = f;
        scenarios.push_back(one.run_config().scenario);
      }
      uhpnf::write_text_atomic(whatif_opts.out,
                               uhpnf::what_if_csv(uhpnf::what_if(whatif_opts.loaded_models(), scenarios)));
    } else if (*register_cmd) {
      uhpnf::cmd_register(registry, uhpnf::parse_objective(objective), snapshot, provenance);
    }
  } catch (const uhpnf::ConfigError& e) {
    return fail(kConfig, e.what());
  } catch (const uhpnf::NumericalError& e) {
    return fail(kNumerical, e.what());
  } catch (const uhpnf::IoError& e) {
    return fail(kIo, e.what());
  } catch (const uhpnf::SnapshotError& e) {
    return fail(kIo, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIo, e.what());
  } catch (const uhpnf::DomainError& e) {
    return fail(kUsage, e.what());
  } catch (const std::exception& e) {
    return fail(kUsage, e.what());
  }
  return kOk;
}
