#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "uhpnf/environment.hpp"
#include "uhpnf/rng.hpp"

namespace uhpnf {

enum class BaselineKind { Greedy, Tdma, Random, Iql };

BaselineKind parse_baseline(const std::string& name);
std::string to_string(BaselineKind kind);

/// Always the maximum power level.
constexpr int greedy_action() { return kMaxPowerAction; }

/// Maximum power in the node's own slot (t mod n == node), silent otherwise.
constexpr int tdma_action(int slot, int node, int n) { return slot % n == node ? kMaxPowerAction : 0; }

/// Uniform over all power levels, including 0 W.
int random_action(Rng& rng);

class GreedyPolicy final : public JointPolicy {
 public:
  int act(int, int, const Eigen::Ref<const Eigen::VectorXd>&) override { return greedy_action(); }
};

class TdmaPolicy final : public JointPolicy {
 public:
  void begin_episode(int n) override { n_ = n; }
  int act(int node, int slot, const Eigen::Ref<const Eigen::VectorXd>&) override { return tdma_action(slot, node, n_); }

 private:
  int n_ = 1;
};

class RandomPolicy final : public JointPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  int act(int, int, const Eigen::Ref<const Eigen::VectorXd>&) override { return random_action(rng_); }

 private:
  Rng rng_;
};

/// Static baselines only; IQL needs trained parameters (see agent.hpp).
std::unique_ptr<JointPolicy> make_static_policy(BaselineKind kind, std::uint64_t seed);

}  // namespace uhpnf
