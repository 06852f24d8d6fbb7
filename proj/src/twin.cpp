#include "uhpnf/twin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "uhpnf/agent.hpp"
#include "uhpnf/errors.hpp"

namespace uhpnf {

namespace {

constexpr std::uint64_t kEvalStream = 11;
constexpr std::uint64_t kPolicyStream = 12;

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

std::uint64_t run_seed(const Scenario& scenario, int run) {
  return derive_seed(scenario.seed, {kEvalStream, static_cast<std::uint64_t>(run)});
}

}  // namespace

double EvalMetrics::objective_metric(Objective objective) const {
  switch (objective) {
    case Objective::MaxConcurrent: return concurrent.mean;
    case Objective::MaxCapacity: return capacity_kb.mean;
    case Objective::MaxFairness: return fairness.mean;
  }
  return 0.0;
}

Model Model::shared(std::string name, ParamSnapshot snapshot) { return Model{std::move(name), {std::move(snapshot)}}; }

const ParamSnapshot& Model::for_node(int node, int n) const {
  if (snapshots.size() == 1) return snapshots.front();
  if (static_cast<int>(snapshots.size()) != n)
    throw DomainError("model '" + name + "' has " + std::to_string(snapshots.size()) + " per-node snapshots but the network has " +
                      std::to_string(n) + " nodes");
  return snapshots[static_cast<std::size_t>(node)];
}

std::vector<EpisodeTrace> simulate(const PolicyFactory& factory, const Scenario& scenario) {
  Environment env(scenario);
  std::vector<EpisodeTrace> traces;
  traces.reserve(static_cast<std::size_t>(scenario.runs));
  for (int r = 0; r < scenario.runs; ++r) {
    const std::uint64_t seed = run_seed(scenario, r);
    auto policy = factory(derive_seed(seed, {kPolicyStream}));
    traces.push_back(run_episode(*policy, env, seed));
  }
  return traces;
}

EvalMetrics evaluate_policy(const PolicyFactory& factory, const Scenario& scenario) {
  Environment env(scenario);
  std::vector<double> concurrent, capacity, fairness;
  for (int r = 0; r < scenario.runs; ++r) {
    const std::uint64_t seed = run_seed(scenario, r);
    auto policy = factory(derive_seed(seed, {kPolicyStream}));
    const EpisodeTrace trace = run_episode(*policy, env, seed);
    concurrent.push_back(trace.mean_concurrent());
    capacity.push_back(trace.capacity_kb());
    fairness.push_back(trace.fairness());
  }
  EvalMetrics m;
  m.concurrent = summarize(concurrent);
  m.capacity_kb = summarize(capacity);
  m.fairness = summarize(fairness);
  m.runs = scenario.runs;
  m.seed = scenario.seed;
  return m;
}

PolicyFactory model_policy(const Model& model, int n) {
  auto params = std::make_shared<std::vector<QNetParamsd>>();
  for (const auto& s : model.snapshots) {
    if (s.shape().observation != kObservationSize || s.shape().actions != kNumActions)
      throw SnapshotError(SnapshotErrc::ArchitectureMismatch,
                          "model '" + model.name + "' does not match the environment's observation/action sizes");
    params->push_back(to_params(s));
  }
  std::vector<std::size_t> index(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    (void)model.for_node(i, n);
    index[static_cast<std::size_t>(i)] = params->size() == 1 ? 0 : static_cast<std::size_t>(i);
  }
  return [params, index](std::uint64_t seed) -> std::unique_ptr<JointPolicy> {
    std::vector<const QNetParamsd*> nets;
    for (std::size_t k : index) nets.push_back(&(*params)[k]);
    // The factory's closure keeps `params` alive; the policy only borrows.
    struct Owning final : QNetJointPolicy {
      Owning(std::vector<const QNetParamsd*> nets, std::uint64_t seed, std::shared_ptr<std::vector<QNetParamsd>> keep)
          : QNetJointPolicy(std::move(nets), 0.0, seed), keep_(std::move(keep)) {}
      std::shared_ptr<std::vector<QNetParamsd>> keep_;
    };
    return std::make_unique<Owning>(std::move(nets), seed, params);
  };
}

EvalMetrics evaluate(const Model& model, const Scenario& scenario) {
  return evaluate_policy(model_policy(model, scenario.n), scenario);
}

EvalMetrics evaluate(const ParamSnapshot& snapshot, const Scenario& scenario) {
  return evaluate(Model::shared("snapshot", snapshot), scenario);
}

WhatIfReport what_if(const std::vector<Model>& models, const std::vector<Scenario>& scenarios) {
  if (models.empty() || scenarios.empty()) throw DomainError("what_if: need at least one model and one scenario");
  WhatIfReport report;
  report.scenarios = scenarios;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::vector<WhatIfCell> group;
    for (const auto& model : models) {
      WhatIfCell cell;
      cell.scenario_index = s;
      cell.model = model.name;
      for (const auto& snap : model.snapshots) cell.checksums.push_back(snap.checksum());
      cell.metrics = evaluate(model, scenarios[s]);
      group.push_back(std::move(cell));
    }
    const Objective objective = scenarios[s].episode.objective;
    std::stable_sort(group.begin(), group.end(), [objective](const WhatIfCell& a, const WhatIfCell& b) {
      return a.metrics.objective_metric(objective) > b.metrics.objective_metric(objective);
    });
    for (auto& c : group) report.cells.push_back(std::move(c));
  }
  return report;
}

void ModelRegistry::put(Objective objective, ParamSnapshot snapshot, std::string provenance) {
  (void)snapshot.shape();
  entries_[objective] = Entry{std::move(snapshot), std::move(provenance)};
}

const ModelRegistry::Entry& ModelRegistry::entry(Objective objective) const {
  auto it = entries_.find(objective);
  if (it == entries_.end()) throw DomainError("model registry: no model registered for objective '" + to_string(objective) + "'");
  return it->second;
}

const ParamSnapshot& select_model(Objective objective, const ModelRegistry& registry) {
  return registry.entry(objective).snapshot;
}

void ModelRegistry::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "objective,file,checksum,provenance\n";
  for (const auto& [objective, e] : entries_) {
    const std::string file = "model_" + to_string(objective) + ".uhpf";
    write_snapshot(dir / file, e.snapshot);
    if (e.provenance.find_first_of(",\n") != std::string::npos)
      throw DomainError("model registry: provenance may not contain commas or newlines");
    manifest << to_string(objective) << ',' << file << ',' << e.snapshot.checksum() << ',' << e.provenance << '\n';
  }
  const auto path = dir / "manifest.csv";
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << manifest.str();
  }
  std::filesystem::rename(tmp, path);
}

ModelRegistry ModelRegistry::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.csv");
  if (!in) throw IoError("cannot open registry manifest in " + dir.string());
  ModelRegistry reg;
  std::string line;
  std::getline(in, line);  // header
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) throw IoError("registry manifest line " + std::to_string(lineno) + ": expected 4 fields");
    ParamSnapshot snap = read_snapshot(dir / fields[1]);
    if (std::to_string(snap.checksum()) != fields[2])
      throw SnapshotError(SnapshotErrc::BadChecksum, "registry: checksum of " + fields[1] + " does not match manifest");
    reg.put(parse_objective(fields[0]), std::move(snap), fields[3]);
  }
  return reg;
}

const ParamSnapshot& NetworkPolicyTable::for_node(int node) const {
  return snapshots.at(node_checksums.at(static_cast<std::size_t>(node)));
}

Model NetworkPolicyTable::as_model(std::string name) const {
  Model m{std::move(name), {}};
  for (std::size_t i = 0; i < node_checksums.size(); ++i) m.snapshots.push_back(for_node(static_cast<int>(i)));
  return m;
}

NetworkPolicyTable compose_joint_policy(const std::map<std::string, Subnet>& subnets, int n) {
  if (n < 1) throw DomainError("compose_joint_policy: n must be positive");
  constexpr std::uint32_t kUnassigned = 0;
  std::vector<bool> assigned(static_cast<std::size_t>(n), false);
  NetworkPolicyTable table;
  table.node_checksums.assign(static_cast<std::size_t>(n), kUnassigned);
  for (const auto& [name, subnet] : subnets) {
    const std::uint32_t sum = subnet.snapshot.checksum();
    table.snapshots.emplace(sum, subnet.snapshot);
    for (int node : subnet.nodes) {
      if (node < 0 || node >= n) throw DomainError("compose_joint_policy: subnet '" + name + "' names unknown node " + std::to_string(node));
      if (assigned[static_cast<std::size_t>(node)])
        throw DomainError("compose_joint_policy: node " + std::to_string(node) + " belongs to more than one subnet");
      assigned[static_cast<std::size_t>(node)] = true;
      table.node_checksums[static_cast<std::size_t>(node)] = sum;
    }
  }
  for (int i = 0; i < n; ++i)
    if (!assigned[static_cast<std::size_t>(i)])
      throw DomainError("compose_joint_policy: node " + std::to_string(i) + " is not covered by any subnet");
  return table;
}

}  // namespace uhpnf
