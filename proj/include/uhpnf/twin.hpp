#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "uhpnf/environment.hpp"
#include "uhpnf/federation.hpp"

namespace uhpnf {

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  ///< population standard deviation across runs
};

struct EvalMetrics {
  MetricSummary concurrent;   ///< mean concurrent links per slot
  MetricSummary capacity_kb;  ///< delivered kilobits per run
  MetricSummary fairness;     ///< Jain index of per-node bits per run (0 if nothing delivered)
  int runs = 0;
  std::uint64_t seed = 0;

  double objective_metric(Objective objective) const;
};

/// A decision model deployed on a network: one snapshot shared by every node, or one per node.
struct Model {
  std::string name;
  std::vector<ParamSnapshot> snapshots;

  static Model shared(std::string name, ParamSnapshot snapshot);
  /// Snapshot node i executes on an n-node network.
  const ParamSnapshot& for_node(int node, int n) const;
};

using PolicyFactory = std::function<std::unique_ptr<JointPolicy>(std::uint64_t run_seed)>;

/// Runs scenario.runs independent seeded episodes of a policy and summarizes the metrics.
EvalMetrics evaluate_policy(const PolicyFactory& factory, const Scenario& scenario);

/// Greedy (epsilon = 0) execution of a model; failed nodes still act randomly.
EvalMetrics evaluate(const Model& model, const Scenario& scenario);
EvalMetrics evaluate(const ParamSnapshot& snapshot, const Scenario& scenario);

/// Per-run episode traces for the same runs evaluate() would execute.
std::vector<EpisodeTrace> simulate(const PolicyFactory& factory, const Scenario& scenario);
PolicyFactory model_policy(const Model& model, int n);

struct WhatIfCell {
  std::size_t scenario_index = 0;
  std::string model;
  std::vector<std::uint32_t> checksums;
  EvalMetrics metrics;
};

struct WhatIfReport {
  std::vector<Scenario> scenarios;
  /// Grouped by scenario; within a group sorted best-first on that scenario's objective.
  std::vector<WhatIfCell> cells;
};

WhatIfReport what_if(const std::vector<Model>& models, const std::vector<Scenario>& scenarios);

/// Pre-trained models indexed by the objective they optimize.
class ModelRegistry {
 public:
  struct Entry {
    ParamSnapshot snapshot;
    std::string provenance;
  };

  void put(Objective objective, ParamSnapshot snapshot, std::string provenance = {});
  bool contains(Objective objective) const { return entries_.count(objective) != 0; }
  const Entry& entry(Objective objective) const;
  const std::map<Objective, Entry>& entries() const { return entries_; }

  /// Writes one UHPF file per objective plus manifest.csv (objective,file,checksum,provenance).
  void save(const std::filesystem::path& dir) const;
  /// Loads and checksum-validates every manifest entry.
  static ModelRegistry load(const std::filesystem::path& dir);

 private:
  std::map<Objective, Entry> entries_;
};

/// The registered snapshot; an unregistered objective is an error.
const ParamSnapshot& select_model(Objective objective, const ModelRegistry& registry);

struct Subnet {
  std::vector<int> nodes;
  ParamSnapshot snapshot;
};

struct NetworkPolicyTable {
  std::vector<std::uint32_t> node_checksums;
  std::map<std::uint32_t, ParamSnapshot> snapshots;

  const ParamSnapshot& for_node(int node) const;
  Model as_model(std::string name) const;
};

/// Merges subnet joint policies into a network-wide node -> snapshot table. The subnets must
/// partition nodes 0..n-1.
NetworkPolicyTable compose_joint_policy(const std::map<std::string, Subnet>& subnets, int n);

}  // namespace uhpnf
