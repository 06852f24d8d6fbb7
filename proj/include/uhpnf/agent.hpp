#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uhpnf/environment.hpp"
#include "uhpnf/federation.hpp"
#include "uhpnf/qnet.hpp"
#include "uhpnf/rng.hpp"

namespace uhpnf {

enum class TrainingMode { Uhpnf, Iql };

TrainingMode parse_training_mode(const std::string& name);
std::string to_string(TrainingMode mode);

struct TrainConfig {
  std::int64_t episodes = 300'000;
  int minibatch = 32;
  int buffer_capacity = 10'000;  ///< in episodes
  int target_update_period = 200;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::int64_t epsilon_decay_episodes = 150'000;
  double learning_rate = 1e-3;
  int train_every = 1;  ///< episodes between optimizer steps
  int curve_every = 100;

  void validate() const;
};

/// Linear decay from epsilon_start to epsilon_end over epsilon_decay_episodes, then flat.
double epsilon(std::int64_t episode, const TrainConfig& config);

/// Argmax with the lowest index winning ties.
int greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q);

/// With probability eps a uniform action, otherwise the greedy one.
int select_action(const Eigen::Ref<const Eigen::VectorXd>& q, double eps, Rng& rng);

inline double td_target(double reward, double max_next_q, bool done, double gamma) {
  return reward + (done ? 0.0 : gamma * max_next_q);
}

/// One agent's view of one episode.
struct AgentSequence {
  Eigen::MatrixXd observations;  ///< kObservationSize x T
  Eigen::VectorXi actions;
  Eigen::VectorXd rewards;
};

/// FIFO ring of whole episodes.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(AgentSequence sequence);
  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  /// i = 0 is the oldest stored episode.
  const AgentSequence& at(int i) const;
  /// `count` distinct episodes, uniformly without replacement.
  std::vector<const AgentSequence*> sample(int count, Rng& rng) const;

 private:
  int capacity_;
  std::vector<AgentSequence> items_;
  std::size_t head_ = 0;  ///< slot of the oldest item once full
};

/// Q-learning targets for the sampled episodes: r_t + gamma * max_a Q_target(o_{t+1}, a), with no
/// bootstrap on the final slot.
SequenceBatch<double> make_td_batch(const QNetParamsd& target, const std::vector<const AgentSequence*>& episodes,
                                    double gamma);

/// One Adam step on a minibatch. Returns the loss, or nullopt (and leaves everything untouched)
/// while the buffer holds fewer than `minibatch` episodes.
std::optional<double> train_step(QNetParamsd& online, const QNetParamsd& target, AdamState<double>& adam,
                                 const ReplayBuffer& buffer, const TrainConfig& config, Rng& rng);

/// Hard copy online -> target when `episodes_done` is a positive multiple of `period`.
bool update_target(QNetParamsd& target, const QNetParamsd& online, std::int64_t episodes_done, int period);

/// Drives one Q-network per node (entries may alias). Hidden states reset per episode.
class QNetJointPolicy : public JointPolicy {
 public:
  QNetJointPolicy(std::vector<const QNetParamsd*> nets, double eps, std::uint64_t seed);

  void set_epsilon(double eps) { epsilon_ = eps; }
  void begin_episode(int n) override;
  int act(int node, int slot, const Eigen::Ref<const Eigen::VectorXd>& observation) override;

 private:
  std::vector<const QNetParamsd*> nets_;
  std::vector<Eigen::MatrixXd> hidden_;
  double epsilon_;
  Rng rng_;
};

struct CurvePoint {
  std::int64_t episode = 0;
  double epsilon = 0.0;
  double mean_reward = 0.0;  ///< mean per-slot team reward over the reporting window
  double loss = 0.0;         ///< mean training loss over the window (0 before the first step)
};

struct TrainResult {
  ParamSnapshot snapshot;             ///< equal-weight aggregate of the final agent parameters
  std::vector<ParamSnapshot> agents;  ///< per-node final parameters, the deployed joint policy
  std::vector<CurvePoint> curve;
  int broadcasts = 0;  ///< failure-triggered re-broadcasts
};

/// Per-node recurrent Q-learners. Uhpnf: shared team reward, parameters federated through the
/// sink at the start of every K-th episode, so agents end with their local updates since the
/// last round. Iql: each node learns from its own delivered bits, no exchange.
TrainResult train(const TrainConfig& config, const Scenario& scenario, TrainingMode mode, const SinkConfig& sink,
                  std::uint64_t seed);

}  // namespace uhpnf
