#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uhpnf/agent.hpp"
#include "uhpnf/config.hpp"
#include "uhpnf/twin.hpp"

namespace uhpnf {

/// `name=path[,path...]`: one path is a shared snapshot, several are per-node snapshots in node
/// order, and a directory stands for the agent_<i>.uhpf files written by cmd_train.
struct ModelArg {
  std::string name;
  std::vector<std::filesystem::path> paths;
};

ModelArg parse_model_arg(const std::string& text);
Model load_model(const ModelArg& arg);

/// Writes snapshot.uhpf (aggregate), agent_<i>.uhpf and curve.csv into out_dir.
TrainResult cmd_train(const RunConfig& config, TrainingMode mode, const std::filesystem::path& out_dir);

/// episode,epsilon,mean_reward,loss
std::string curve_csv(const std::vector<CurvePoint>& curve);

/// Resolves greedy/tdma/random, or the name of one of `models`.
PolicyFactory resolve_policy(const std::string& name, const std::vector<Model>& models, int n);

/// policy,epsilon,mean_concurrent,stddev; one row per (policy, failure probability).
std::string cmd_compare(const RunConfig& config, const std::vector<std::string>& policies,
                        const std::vector<Model>& models, const std::vector<double>& epsilons);

/// model,n,capacity_kb,fairness
std::string cmd_sweep_objectives(const RunConfig& config, const std::vector<Model>& models, const std::vector<int>& ns);

/// Per-slot CSV of a JSON trace file.
std::string cmd_export(const std::filesystem::path& trace);

std::vector<EpisodeTrace> cmd_simulate(const RunConfig& config, const std::string& policy, const std::vector<Model>& models);

/// scenario,objective,rank,model,concurrent_mean,concurrent_std,capacity_kb_mean,capacity_kb_std,fairness_mean,fairness_std
std::string what_if_csv(const WhatIfReport& report);

/// Adds (or replaces) one objective's snapshot in the registry directory, creating it if needed.
void cmd_register(const std::filesystem::path& registry, Objective objective, const std::filesystem::path& snapshot,
                  const std::string& provenance);

}  // namespace uhpnf
