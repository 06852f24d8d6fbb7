#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "uhpnf/baselines.hpp"
#include "uhpnf/errors.hpp"
#include "uhpnf/twin.hpp"

using namespace uhpnf;

namespace {

Scenario quick(Objective objective = Objective::MaxConcurrent, int n = 3) {
  Scenario s;
  s.n = n;
  s.runs = 8;
  s.episode.slots = 12;
  s.episode.objective = objective;
  return s;
}

ParamSnapshot zero_snapshot() { return make_snapshot(QNetParamsd()); }

// Q-values that always prefer a single action, independent of the observation.
ParamSnapshot prefers(int action) {
  QNetParamsd p;
  p.fc2_bias()[action] = 1.0;
  return make_snapshot(p);
}

}  // namespace

TEST_CASE("zero snapshot stays silent") {
  const EvalMetrics m = evaluate(zero_snapshot(), quick());
  CHECK(m.capacity_kb.mean == 0.0);
  CHECK(m.concurrent.mean == 0.0);
  CHECK(m.runs == 8);
}

TEST_CASE("evaluation is reproducible and mirrors the static policy it encodes") {
  Scenario s = quick(Objective::MaxCapacity, 5);
  s.episode.epsilon_fail = 0.2;
  const EvalMetrics a = evaluate(prefers(kMaxPowerAction), s);
  const EvalMetrics b = evaluate(prefers(kMaxPowerAction), s);
  CHECK(a.capacity_kb.mean == b.capacity_kb.mean);
  CHECK(a.fairness.stddev == b.fairness.stddev);
  const EvalMetrics greedy =
      evaluate_policy([](std::uint64_t seed) { return make_static_policy(BaselineKind::Greedy, seed); }, s);
  CHECK(a.concurrent.mean == greedy.concurrent.mean);
  CHECK(a.capacity_kb.mean == greedy.capacity_kb.mean);
}

TEST_CASE("tdma self-check through the evaluator") {
  Scenario s = quick(Objective::MaxConcurrent, 5);
  s.episode.slots = 60;
  const EvalMetrics m =
      evaluate_policy([](std::uint64_t seed) { return make_static_policy(BaselineKind::Tdma, seed); }, s);
  CHECK(m.concurrent.mean == 1.0);
}

TEST_CASE("architecture mismatch is rejected") {
  ParamSnapshot odd = make_snapshot(QNetParamsd(QNetShape{10, 64, 7}));
  CHECK_THROWS_AS(evaluate(odd, quick()), SnapshotError);
  Model two{"two", {zero_snapshot(), zero_snapshot()}};
  CHECK_THROWS_AS(evaluate(two, quick()), DomainError);
}

TEST_CASE("what_if") {
  const Model loud = Model::shared("loud", prefers(kMaxPowerAction));
  const Model quiet = Model::shared("quiet", zero_snapshot());
  const Model low = Model::shared("low", prefers(1));

  SUBCASE("single cell equals evaluate") {
    const WhatIfReport r = what_if({loud}, {quick()});
    REQUIRE(r.cells.size() == 1u);
    CHECK(r.cells[0].metrics.concurrent.mean == evaluate(loud, quick()).concurrent.mean);
    CHECK(r.cells[0].checksums.front() == loud.snapshots.front().checksum());
  }
  SUBCASE("cross product sorted per scenario by its objective") {
    Scenario cap = quick(Objective::MaxCapacity, 4);
    cap.episode.epsilon_fail = 0.3;
    const std::vector<Scenario> scenarios{cap, quick(Objective::MaxFairness, 4)};
    const WhatIfReport r = what_if({quiet, loud, low}, scenarios);
    REQUIRE(r.cells.size() == 6u);
    for (std::size_t s = 0; s < 2; ++s) {
      const Objective obj = scenarios[s].episode.objective;
      for (std::size_t k = 0; k < 3; ++k) CHECK(r.cells[3 * s + k].scenario_index == s);
      CHECK(r.cells[3 * s].metrics.objective_metric(obj) >= r.cells[3 * s + 1].metrics.objective_metric(obj));
      CHECK(r.cells[3 * s + 1].metrics.objective_metric(obj) >= r.cells[3 * s + 2].metrics.objective_metric(obj));
    }
    const WhatIfReport again = what_if({quiet, loud, low}, scenarios);
    for (std::size_t k = 0; k < 6; ++k) CHECK(again.cells[k].model == r.cells[k].model);
  }
  CHECK_THROWS_AS(what_if({}, {quick()}), DomainError);
  CHECK_THROWS_AS(what_if({loud}, {}), DomainError);
}

TEST_CASE("model registry") {
  ModelRegistry reg;
  const ParamSnapshot a = prefers(2), b = prefers(5);
  reg.put(Objective::MaxCapacity, a, "seed-1");
  reg.put(Objective::MaxFairness, b, "seed-2");
  CHECK(select_model(Objective::MaxFairness, reg).values == b.values);
  CHECK(select_model(Objective::MaxCapacity, reg).values == a.values);
  CHECK_THROWS_AS(select_model(Objective::MaxConcurrent, reg), DomainError);
  CHECK(evaluate(select_model(Objective::MaxCapacity, reg), quick()).capacity_kb.mean ==
        evaluate(a, quick()).capacity_kb.mean);

  const auto dir = std::filesystem::temp_directory_path() / "uhpnf_test_registry";
  std::filesystem::remove_all(dir);
  reg.save(dir);
  const ModelRegistry back = ModelRegistry::load(dir);
  CHECK(back.entries().size() == 2u);
  CHECK(back.entry(Objective::MaxFairness).provenance == "seed-2");
  CHECK(select_model(Objective::MaxCapacity, back).values == a.values);

  // A snapshot file that no longer matches its manifest checksum is refused.
  write_snapshot(dir / "model_capacity.uhpf", b);
  CHECK_THROWS_AS(ModelRegistry::load(dir), SnapshotError);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(ModelRegistry::load(dir), IoError);
}

TEST_CASE("compose_joint_policy") {
  const ParamSnapshot a = prefers(1), b = prefers(6);
  SUBCASE("single subnet") {
    const auto t = compose_joint_policy({{"all", Subnet{{0, 1, 2}, a}}}, 3);
    for (int i = 0; i < 3; ++i) CHECK(t.node_checksums[static_cast<std::size_t>(i)] == a.checksum());
  }
  SUBCASE("two disjoint subnets dispatch per node") {
    const auto t = compose_joint_policy({{"west", Subnet{{0, 2}, a}}, {"east", Subnet{{1, 3}, b}}}, 4);
    CHECK(t.for_node(0).values == a.values);
    CHECK(t.for_node(1).values == b.values);
    CHECK(t.for_node(2).values == a.values);
    CHECK(t.for_node(3).values == b.values);
    const Model m = t.as_model("composed");
    Scenario s = quick(Objective::MaxConcurrent, 4);
    const auto traces = simulate(model_policy(m, 4), s);
    for (const auto& slot : traces[0].slots) {
      CHECK(slot.metrics.actions[0] == 1);
      CHECK(slot.metrics.actions[1] == 6);
    }
  }
  CHECK_THROWS_AS(compose_joint_policy({{"x", Subnet{{0, 1}, a}}, {"y", Subnet{{1, 2}, b}}}, 3), DomainError);
  CHECK_THROWS_AS(compose_joint_policy({{"x", Subnet{{0, 1}, a}}}, 3), DomainError);
  CHECK_THROWS_AS(compose_joint_policy({{"x", Subnet{{0, 5}, a}}}, 3), DomainError);
}
