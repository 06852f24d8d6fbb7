#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uhpnf/channel.hpp"
#include "uhpnf/rng.hpp"
#include "uhpnf/topology.hpp"

namespace uhpnf {

/// Transmit power per action index; index 0 is "not scheduled".
inline constexpr std::array<double, 7> kPowerLevelsW{0.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
inline constexpr int kNumActions = static_cast<int>(kPowerLevelsW.size());
inline constexpr int kMaxPowerAction = kNumActions - 1;
inline constexpr int kObservationSize = 12;

/// Observation layout, one column per node.
namespace obs {
inline constexpr int kEnergy = 0;
inline constexpr int kPrevActionOneHot = 1;  // 7 entries
inline constexpr int kNodeIdentity = 8;
inline constexpr int kPrevSinr = 9;
inline constexpr int kPrevSuccess = 10;
inline constexpr int kSlotPhase = 11;
}  // namespace obs

enum class Objective { MaxConcurrent, MaxCapacity, MaxFairness };

Objective parse_objective(const std::string& name);
std::string to_string(Objective objective);

struct EpisodeConfig {
  int slots = 60;
  double slot_duration = 10.0;  // s
  Objective objective = Objective::MaxConcurrent;
  double epsilon_fail = 0.0;
  double battery_j = 1.0e6;
};

/// Everything needed to reproduce an evaluation: geometry, channel, episode shape and seeds.
struct Scenario {
  int n = 5;
  double radius = 4000.0;
  double height = 1000.0;
  Placement placement = Placement::Deterministic;
  ChannelParams channel;
  EpisodeConfig episode;
  std::uint64_t seed = 1;
  int runs = 60;

  void validate() const;
  Topology topology() const;
};

struct SlotMetrics {
  Eigen::VectorXi actions;  ///< effective action per node, after failure override
  Eigen::VectorXd powers_w;
  Eigen::VectorXd sinr;
  Eigen::VectorXd bits;  ///< delivered this slot, 0 if below threshold
  std::vector<bool> success;
  int concurrent = 0;
  Eigen::VectorXd individual_reward;  ///< own bits / (B * T)
};

int concurrent_count(const Eigen::Ref<const Eigen::VectorXd>& powers_w,
                     const Eigen::Ref<const Eigen::VectorXd>& sinrs, double threshold);

/// Team reward shared by every agent for one slot.
double reward(Objective objective, const SlotMetrics& metrics, const Eigen::VectorXd& cumulative_bits,
              double bandwidth_hz, double slot_duration);

struct StepResult {
  Eigen::MatrixXd observations;  ///< kObservationSize x n, for the next slot
  double team_reward = 0.0;
  SlotMetrics metrics;
  bool done = false;
};

/// Time-slotted multi-link environment. Not thread-safe; use one instance per context.
class Environment {
 public:
  explicit Environment(const Scenario& scenario);

  /// Starts a new episode: full batteries, slot 0, fresh failure mask drawn from `seed`.
  Eigen::MatrixXd reset(std::uint64_t seed);
  StepResult step(const Eigen::Ref<const Eigen::VectorXi>& joint_action);

  int size() const { return n_; }
  int slot() const { return slot_; }
  bool finished() const { return slot_ >= scenario_.episode.slots; }
  const Scenario& scenario() const { return scenario_; }
  const GainMatrix& gains() const { return gains_; }
  const FailureMask& failures() const { return failures_; }
  const Eigen::VectorXd& battery() const { return battery_; }
  const Eigen::VectorXd& cumulative_bits() const { return cumulative_bits_; }

 private:
  Eigen::MatrixXd observe() const;

  Scenario scenario_;
  int n_;
  GainMatrix gains_;
  Rng rng_;
  FailureMask failures_;
  int slot_ = 0;
  Eigen::VectorXd battery_;
  Eigen::VectorXd cumulative_bits_;
  Eigen::VectorXi prev_action_;
  Eigen::VectorXd prev_sinr_;
  std::vector<bool> prev_success_;
};

/// Per-node decision rule driven by run_episode. Failed nodes are never queried.
class JointPolicy {
 public:
  virtual ~JointPolicy() = default;
  virtual void begin_episode(int n) { (void)n; }
  virtual int act(int node, int slot, const Eigen::Ref<const Eigen::VectorXd>& observation) = 0;
};

struct SlotRecord {
  Eigen::MatrixXd observations;  ///< seen before acting
  SlotMetrics metrics;
  double team_reward = 0.0;
  bool terminal = false;
};

struct EpisodeTrace {
  int n = 0;
  FailureMask failures;
  std::vector<SlotRecord> slots;

  double mean_concurrent() const;
  double capacity_kb() const;
  /// Jain index of per-node delivered bits over the episode; 0 when nothing was delivered.
  double fairness() const;
  Eigen::VectorXd node_bits() const;
};

EpisodeTrace run_episode(JointPolicy& policy, Environment& env, std::uint64_t seed);

}  // namespace uhpnf
