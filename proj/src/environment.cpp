#include "uhpnf/environment.hpp"

#include <algorithm>
#include <cmath>

#include "uhpnf/errors.hpp"

namespace uhpnf {

Objective parse_objective(const std::string& name) {
  if (name == "concurrent" || name == "max-concurrent") return Objective::MaxConcurrent;
  if (name == "capacity" || name == "max-capacity") return Objective::MaxCapacity;
  if (name == "fairness" || name == "max-fairness") return Objective::MaxFairness;
  throw DomainError("unknown objective '" + name + "'");
}

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::MaxConcurrent: return "concurrent";
    case Objective::MaxCapacity: return "capacity";
    case Objective::MaxFairness: return "fairness";
  }
  return "?";
}

void Scenario::validate() const {
  if (n < 1) throw DomainError("scenario: n must be at least 1");
  if (episode.slots < 1) throw DomainError("scenario: slots must be at least 1");
  if (!(episode.slot_duration > 0)) throw DomainError("scenario: slot duration must be positive");
  if (!(episode.epsilon_fail >= 0 && episode.epsilon_fail <= 1))
    throw DomainError("scenario: failure probability outside [0, 1]");
  if (!(episode.battery_j > 0)) throw DomainError("scenario: battery capacity must be positive");
  if (runs < 1) throw DomainError("scenario: runs must be at least 1");
  channel.validate();
}

Topology Scenario::topology() const { return place_cylinder(n, radius, height, placement, seed); }

int concurrent_count(const Eigen::Ref<const Eigen::VectorXd>& powers_w,
                     const Eigen::Ref<const Eigen::VectorXd>& sinrs, double threshold) {
  int count = 0;
  for (Eigen::Index i = 0; i < sinrs.size(); ++i)
    if (powers_w[i] > 0.0 && sinrs[i] >= threshold) ++count;
  return count;
}

double reward(Objective objective, const SlotMetrics& metrics, const Eigen::VectorXd& cumulative_bits,
              double bandwidth_hz, double slot_duration) {
  switch (objective) {
    case Objective::MaxConcurrent:
      return metrics.concurrent;
    case Objective::MaxCapacity:
      return metrics.bits.sum() / (bandwidth_hz * slot_duration);
    case Objective::MaxFairness:
      return cumulative_bits.sum() > 0.0 ? jain_fairness(cumulative_bits) : 0.0;
  }
  return 0.0;
}

Environment::Environment(const Scenario& scenario) : scenario_(scenario), n_(scenario.n) {
  scenario_.validate();
  gains_ = gain_matrix(scenario_.topology(), scenario_.channel);
  reset(scenario_.seed);
}

Eigen::MatrixXd Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  failures_ = sample_failures(scenario_.episode.epsilon_fail, n_, rng_);
  slot_ = 0;
  battery_ = Eigen::VectorXd::Constant(n_, scenario_.episode.battery_j);
  cumulative_bits_ = Eigen::VectorXd::Zero(n_);
  prev_action_ = Eigen::VectorXi::Constant(n_, -1);
  prev_sinr_ = Eigen::VectorXd::Zero(n_);
  prev_success_.assign(static_cast<std::size_t>(n_), false);
  return observe();
}

Eigen::MatrixXd Environment::observe() const {
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(kObservationSize, n_);
  const auto& ep = scenario_.episode;
  for (int i = 0; i < n_; ++i) {
    o(obs::kEnergy, i) = battery_[i] / ep.battery_j;
    o(obs::kNodeIdentity, i) = n_ > 1 ? 2.0 * i / (n_ - 1) - 1.0 : 0.0;
    o(obs::kSlotPhase, i) = static_cast<double>(slot_) / ep.slots;
    if (slot_ == 0) continue;
    o(obs::kPrevActionOneHot + prev_action_[i], i) = 1.0;
    const double sinr_db = prev_sinr_[i] > 0.0 ? 10.0 * std::log10(prev_sinr_[i]) : -20.0;
    o(obs::kPrevSinr, i) = (std::clamp(sinr_db, -20.0, 40.0) - 10.0) / 30.0;
    o(obs::kPrevSuccess, i) = prev_success_[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  return o;
}

StepResult Environment::step(const Eigen::Ref<const Eigen::VectorXi>& joint_action) {
  if (finished()) throw DomainError("step: episode already finished");
  if (joint_action.size() != n_) throw DomainError("step: need exactly one action per node");

  const auto& ep = scenario_.episode;
  const auto& ch = scenario_.channel;
  std::uniform_int_distribution<int> random_action(0, kNumActions - 1);

  SlotMetrics m;
  m.actions.resize(n_);
  m.powers_w.resize(n_);
  for (int i = 0; i < n_; ++i) {
    int a;
    if (failures_[static_cast<std::size_t>(i)]) {
      a = random_action(rng_);
    } else {
      a = joint_action[i];
      if (a < 0 || a >= kNumActions) throw DomainError("step: action index outside [0, 6]");
    }
    // A drained battery cannot fund the slot.
    if (kPowerLevelsW[a] * ep.slot_duration > battery_[i]) a = 0;
    m.actions[i] = a;
    m.powers_w[i] = kPowerLevelsW[a];
  }

  m.sinr = sinr(m.powers_w, gains_, ch);
  m.bits = Eigen::VectorXd::Zero(n_);
  m.success.assign(static_cast<std::size_t>(n_), false);
  for (int i = 0; i < n_; ++i) {
    const bool ok = m.powers_w[i] > 0.0 && m.sinr[i] >= ch.success_threshold;
    m.success[static_cast<std::size_t>(i)] = ok;
    if (ok) m.bits[i] = shannon_rate(m.sinr[i], ch.bandwidth_hz) * ep.slot_duration;
  }
  m.concurrent = concurrent_count(m.powers_w, m.sinr, ch.success_threshold);
  m.individual_reward = m.bits / (ch.bandwidth_hz * ep.slot_duration);

  battery_ -= m.powers_w * ep.slot_duration;
  cumulative_bits_ += m.bits;

  StepResult result;
  result.team_reward = reward(ep.objective, m, cumulative_bits_, ch.bandwidth_hz, ep.slot_duration);

  prev_action_ = m.actions;
  prev_sinr_ = m.sinr;
  prev_success_ = m.success;
  ++slot_;

  result.done = finished();
  result.observations = observe();
  result.metrics = std::move(m);
  return result;
}

double EpisodeTrace::mean_concurrent() const {
  if (slots.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : slots) total += s.metrics.concurrent;
  return total / static_cast<double>(slots.size());
}

Eigen::VectorXd EpisodeTrace::node_bits() const {
  Eigen::VectorXd bits = Eigen::VectorXd::Zero(n);
  for (const auto& s : slots) bits += s.metrics.bits;
  return bits;
}

double EpisodeTrace::capacity_kb() const { return node_bits().sum() / 1000.0; }

double EpisodeTrace::fairness() const {
  const Eigen::VectorXd bits = node_bits();
  return bits.sum() > 0.0 ? jain_fairness(bits) : 0.0;
}

EpisodeTrace run_episode(JointPolicy& policy, Environment& env, std::uint64_t seed) {
  EpisodeTrace trace;
  trace.n = env.size();
  Eigen::MatrixXd observations = env.reset(seed);
  trace.failures = env.failures();
  trace.slots.reserve(static_cast<std::size_t>(env.scenario().episode.slots));
  policy.begin_episode(env.size());

  Eigen::VectorXi actions(env.size());
  while (!env.finished()) {
    const int t = env.slot();
    for (int i = 0; i < env.size(); ++i)
      actions[i] = env.failures()[static_cast<std::size_t>(i)] ? 0 : policy.act(i, t, observations.col(i));
    StepResult r = env.step(actions);
    SlotRecord rec;
    rec.observations = std::move(observations);
    rec.metrics = std::move(r.metrics);
    rec.team_reward = r.team_reward;
    rec.terminal = r.done;
    trace.slots.push_back(std::move(rec));
    observations = std::move(r.observations);
  }
  return trace;
}

}  // namespace uhpnf
