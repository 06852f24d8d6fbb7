#include "uhpnf/agent.hpp"

#include <algorithm>
#include <cmath>

#include "uhpnf/errors.hpp"

namespace uhpnf {

namespace {

enum Stream : std::uint64_t { kEnvStream = 1, kActStream = 2, kSampleStream = 3 };

}  // namespace

TrainingMode parse_training_mode(const std::string& name) {
  if (name == "uhpnf") return TrainingMode::Uhpnf;
  if (name == "iql") return TrainingMode::Iql;
  throw DomainError("unknown training mode '" + name + "'");
}

std::string to_string(TrainingMode mode) { return mode == TrainingMode::Uhpnf ? "uhpnf" : "iql"; }

void TrainConfig::validate() const {
  if (episodes < 0) throw DomainError("train: episodes must be non-negative");
  if (minibatch < 1) throw DomainError("train: minibatch must be positive");
  if (buffer_capacity < minibatch) throw DomainError("train: buffer capacity below minibatch size");
  if (target_update_period < 1) throw DomainError("train: target update period must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("train: discount outside [0, 1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
    throw DomainError("train: need 0 <= epsilon_end <= epsilon_start <= 1");
  if (epsilon_decay_episodes < 1) throw DomainError("train: epsilon decay length must be positive");
  if (!(learning_rate > 0.0)) throw DomainError("train: learning rate must be positive");
  if (train_every < 1 || curve_every < 1) throw DomainError("train: train_every and curve_every must be positive");
}

double epsilon(std::int64_t episode, const TrainConfig& config) {
  const double frac = static_cast<double>(std::max<std::int64_t>(episode, 0)) /
                      static_cast<double>(config.epsilon_decay_episodes);
  return std::max(config.epsilon_end, config.epsilon_start - (config.epsilon_start - config.epsilon_end) * frac);
}

int greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q) {
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return static_cast<int>(best);
}

int select_action(const Eigen::Ref<const Eigen::VectorXd>& q, double eps, Rng& rng) {
  if (!q.allFinite()) throw NumericalError("select_action: non-finite Q-values");
  if (eps > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eps) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
      return pick(rng);
    }
  }
  return greedy_action(q);
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw DomainError("ReplayBuffer: capacity must be positive");
  items_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(AgentSequence sequence) {
  if (size() < capacity_) {
    items_.push_back(std::move(sequence));
    return;
  }
  items_[head_] = std::move(sequence);
  head_ = (head_ + 1) % items_.size();
}

const AgentSequence& ReplayBuffer::at(int i) const {
  if (i < 0 || i >= size()) throw DomainError("ReplayBuffer::at: index out of range");
  return items_[(head_ + static_cast<std::size_t>(i)) % items_.size()];
}

std::vector<const AgentSequence*> ReplayBuffer::sample(int count, Rng& rng) const {
  if (count > size()) throw DomainError("ReplayBuffer::sample: not enough episodes");
  // Floyd's algorithm: `count` distinct indices, each subset equally likely.
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(count));
  for (int j = size() - count; j < size(); ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
      chosen.push_back(t);
    else
      chosen.push_back(j);
  }
  std::vector<const AgentSequence*> out;
  out.reserve(chosen.size());
  for (int i : chosen) out.push_back(&items_[static_cast<std::size_t>(i)]);
  return out;
}

SequenceBatch<double> make_td_batch(const QNetParamsd& target, const std::vector<const AgentSequence*>& episodes,
                                    double gamma) {
  if (episodes.empty()) throw DomainError("make_td_batch: no episodes");
  const Eigen::Index T = episodes.front()->observations.cols();
  const auto B = static_cast<Eigen::Index>(episodes.size());
  SequenceBatch<double> batch;
  batch.observations.assign(static_cast<std::size_t>(T), Eigen::MatrixXd(kObservationSize, B));
  batch.actions.resize(T, B);
  batch.targets.resize(T, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const AgentSequence& e = *episodes[static_cast<std::size_t>(b)];
    if (e.observations.cols() != T) throw DomainError("make_td_batch: episodes of unequal length");
    for (Eigen::Index t = 0; t < T; ++t) batch.observations[static_cast<std::size_t>(t)].col(b) = e.observations.col(t);
    batch.actions.col(b) = e.actions;
  }
  const auto next_q = unroll(target, batch.observations);
  for (Eigen::Index t = 0; t < T; ++t) {
    const bool done = t + 1 == T;
    for (Eigen::Index b = 0; b < B; ++b) {
      const double max_next = done ? 0.0 : next_q[static_cast<std::size_t>(t + 1)].col(b).maxCoeff();
      batch.targets(t, b) = td_target(episodes[static_cast<std::size_t>(b)]->rewards[t], max_next, done, gamma);
    }
  }
  return batch;
}

std::optional<double> train_step(QNetParamsd& online, const QNetParamsd& target, AdamState<double>& adam,
                                 const ReplayBuffer& buffer, const TrainConfig& config, Rng& rng) {
  if (buffer.size() < config.minibatch) return std::nullopt;
  const auto episodes = buffer.sample(config.minibatch, rng);
  const auto batch = make_td_batch(target, episodes, config.gamma);
  auto [loss, gradient] = bptt_gradients(online, batch);
  adam_step(online, gradient, adam, AdamConfig{config.learning_rate});
  if (!online.all_finite()) throw NumericalError("train_step: parameters became non-finite");
  return loss;
}

bool update_target(QNetParamsd& target, const QNetParamsd& online, std::int64_t episodes_done, int period) {
  if (episodes_done <= 0 || episodes_done % period != 0) return false;
  target = online;
  return true;
}

QNetJointPolicy::QNetJointPolicy(std::vector<const QNetParamsd*> nets, double eps, std::uint64_t seed)
    : nets_(std::move(nets)), epsilon_(eps), rng_(seed) {
  for (const auto* net : nets_) {
    if (net == nullptr) throw DomainError("QNetJointPolicy: missing network");
    if (net->shape().observation != kObservationSize || net->shape().actions != kNumActions)
      throw DomainError("QNetJointPolicy: network does not match the environment's observation/action sizes");
  }
}

void QNetJointPolicy::begin_episode(int n) {
  if (n != static_cast<int>(nets_.size())) throw DomainError("QNetJointPolicy: node count mismatch");
  hidden_.assign(nets_.size(), Eigen::MatrixXd());
  for (std::size_t i = 0; i < nets_.size(); ++i) hidden_[i] = Eigen::MatrixXd::Zero(nets_[i]->shape().hidden, 1);
}

int QNetJointPolicy::act(int node, int /*slot*/, const Eigen::Ref<const Eigen::VectorXd>& observation) {
  const auto i = static_cast<std::size_t>(node);
  auto [q, next] = forward(*nets_[i], observation, hidden_[i]);
  hidden_[i] = std::move(next);
  return select_action(q.col(0), epsilon_, rng_);
}

TrainResult train(const TrainConfig& config, const Scenario& scenario, TrainingMode mode, const SinkConfig& sink,
                  std::uint64_t seed) {
  config.validate();
  sink.validate();
  Environment env(scenario);
  const int n = env.size();

  const QNetParamsd init = init_params<double>(seed);
  std::vector<QNetParamsd> online(static_cast<std::size_t>(n), init);
  std::vector<QNetParamsd> target = online;
  std::vector<AdamState<double>> adam(static_cast<std::size_t>(n), AdamState<double>(init.flat().size()));
  std::vector<ReplayBuffer> buffers(static_cast<std::size_t>(n), ReplayBuffer(config.buffer_capacity));
  Rng sample_rng(derive_seed(seed, {kSampleStream}));

  std::vector<const QNetParamsd*> views;
  std::vector<QNetParamsd*> agent_ptrs;
  for (auto& p : online) {
    views.push_back(&p);
    agent_ptrs.push_back(&p);
  }
  QNetJointPolicy behaviour(views, 1.0, derive_seed(seed, {kActStream}));

  std::optional<ParamSnapshot> latest_aggregate;
  LinkMonitor monitor(n, sink.window);

  TrainResult result;
  double window_reward = 0.0, window_loss = 0.0;
  int window_episodes = 0, window_steps = 0;
  const int T = scenario.episode.slots;

  for (std::int64_t e = 0; e < config.episodes; ++e) {
    // Sink rounds open an episode, so agents always deploy with their local updates since the last aggregate.
    if (mode == TrainingMode::Uhpnf && e > 0)
      if (auto aggregate = sink_round(agent_ptrs, e, sink)) latest_aggregate = std::move(aggregate);
    behaviour.set_epsilon(epsilon(e, config));
    const EpisodeTrace trace = run_episode(behaviour, env, derive_seed(seed, {kEnvStream, static_cast<std::uint64_t>(e)}));

    for (int i = 0; i < n; ++i) {
      AgentSequence seq{Eigen::MatrixXd(kObservationSize, T), Eigen::VectorXi(T), Eigen::VectorXd(T)};
      for (int t = 0; t < T; ++t) {
        const auto& slot = trace.slots[static_cast<std::size_t>(t)];
        seq.observations.col(t) = slot.observations.col(i);
        seq.actions[t] = slot.metrics.actions[i];
        seq.rewards[t] = mode == TrainingMode::Uhpnf ? slot.team_reward : slot.metrics.individual_reward[i];
      }
      buffers[static_cast<std::size_t>(i)].push(std::move(seq));
    }
    for (const auto& slot : trace.slots) window_reward += slot.team_reward / T;
    ++window_episodes;

    const std::int64_t done = e + 1;
    if (done % config.train_every == 0) {
      for (std::size_t i = 0; i < online.size(); ++i) {
        const auto loss = train_step(online[i], target[i], adam[i], buffers[i], config, sample_rng);
        if (loss) {
          if (!std::isfinite(*loss)) throw NumericalError("train: non-finite loss at episode " + std::to_string(done));
          window_loss += *loss;
          ++window_steps;
        }
      }
    }
    for (std::size_t i = 0; i < online.size(); ++i) update_target(target[i], online[i], done, config.target_update_period);

    if (mode == TrainingMode::Uhpnf && sink.responsive) {
      for (const auto& slot : trace.slots) {
        monitor.record(slot.metrics);
        if (auto b = detect_and_restore(monitor, latest_aggregate, sink)) {
          const QNetParamsd restored = to_params(b->snapshot);
          for (int r : b->recipients) online[static_cast<std::size_t>(r)] = restored;
          ++result.broadcasts;
          monitor.clear();
        }
      }
    }

    if (done % config.curve_every == 0 || done == config.episodes) {
      result.curve.push_back(CurvePoint{done, epsilon(e, config), window_reward / window_episodes,
                                        window_steps > 0 ? window_loss / window_steps : 0.0});
      window_reward = window_loss = 0.0;
      window_episodes = window_steps = 0;
    }
  }

  for (int i = 0; i < n; ++i)
    result.agents.push_back(make_snapshot(online[static_cast<std::size_t>(i)], i, config.episodes));
  result.snapshot = fedavg(result.agents);
  return result;
}

}  // namespace uhpnf
