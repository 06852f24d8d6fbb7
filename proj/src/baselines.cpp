#include "uhpnf/baselines.hpp"

#include "uhpnf/errors.hpp"

namespace uhpnf {

BaselineKind parse_baseline(const std::string& name) {
  if (name == "greedy") return BaselineKind::Greedy;
  if (name == "tdma") return BaselineKind::Tdma;
  if (name == "random") return BaselineKind::Random;
  if (name == "iql") return BaselineKind::Iql;
  throw DomainError("unknown baseline '" + name + "'");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Greedy: return "greedy";
    case BaselineKind::Tdma: return "tdma";
    case BaselineKind::Random: return "random";
    case BaselineKind::Iql: return "iql";
  }
  return "?";
}

int random_action(Rng& rng) {
  std::uniform_int_distribution<int> pick(0, kNumActions - 1);
  return pick(rng);
}

std::unique_ptr<JointPolicy> make_static_policy(BaselineKind kind, std::uint64_t seed) {
  switch (kind) {
    case BaselineKind::Greedy: return std::make_unique<GreedyPolicy>();
    case BaselineKind::Tdma: return std::make_unique<TdmaPolicy>();
    case BaselineKind::Random: return std::make_unique<RandomPolicy>(seed);
    case BaselineKind::Iql: break;
  }
  throw DomainError("make_static_policy: IQL is a trained policy");
}

}  // namespace uhpnf
