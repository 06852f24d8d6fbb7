#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uhpnf/errors.hpp"
#include "uhpnf/rng.hpp"

namespace uhpnf {

/// Layer widths of the recurrent Q-network: obs -> FC(hidden) -> GRU(hidden) -> ReLU -> FC(actions).
struct QNetShape {
  int observation = 12;
  int hidden = 64;
  int actions = 7;

  Eigen::Index param_count() const {
    const Eigen::Index o = observation, h = hidden, a = actions;
    return h * o + h            // fc1
           + 3 * (h * h + h * h + h)  // gru: input, recurrent, bias per gate
           + a * h + a;         // fc2
  }
  bool operator==(const QNetShape&) const = default;
};

/// All Q-network weights, stored contiguously so the flat vector is the canonical form.
///
/// Block order in the flat vector (each matrix column-major):
///   fc1 weight (hidden x obs), fc1 bias, GRU input weight (3*hidden x hidden),
///   GRU recurrent weight (3*hidden x hidden), GRU bias (3*hidden), fc2 weight
///   (actions x hidden), fc2 bias. GRU rows are stacked [update; reset; candidate].
template <typename Scalar>
class QNetParams {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  explicit QNetParams(QNetShape shape = {}) : shape_(shape), values_(Vector::Zero(shape.param_count())) {}

  QNetParams(QNetShape shape, Vector values) : shape_(shape), values_(std::move(values)) {
    if (values_.size() != shape_.param_count())
      throw DomainError("QNetParams: vector length " + std::to_string(values_.size()) +
                        " does not match architecture (" + std::to_string(shape_.param_count()) + ")");
  }

  const QNetShape& shape() const { return shape_; }
  Vector& flat() { return values_; }
  const Vector& flat() const { return values_; }

  MatrixMap fc1_weight() { return mat(offset_fc1_w(), h(), o()); }
  ConstMatrixMap fc1_weight() const { return cmat(offset_fc1_w(), h(), o()); }
  VectorMap fc1_bias() { return vec(offset_fc1_b(), h()); }
  ConstVectorMap fc1_bias() const { return cvec(offset_fc1_b(), h()); }
  MatrixMap gru_input() { return mat(offset_gru_w(), 3 * h(), h()); }
  ConstMatrixMap gru_input() const { return cmat(offset_gru_w(), 3 * h(), h()); }
  MatrixMap gru_recurrent() { return mat(offset_gru_u(), 3 * h(), h()); }
  ConstMatrixMap gru_recurrent() const { return cmat(offset_gru_u(), 3 * h(), h()); }
  VectorMap gru_bias() { return vec(offset_gru_b(), 3 * h()); }
  ConstVectorMap gru_bias() const { return cvec(offset_gru_b(), 3 * h()); }
  MatrixMap fc2_weight() { return mat(offset_fc2_w(), a(), h()); }
  ConstMatrixMap fc2_weight() const { return cmat(offset_fc2_w(), a(), h()); }
  VectorMap fc2_bias() { return vec(offset_fc2_b(), a()); }
  ConstVectorMap fc2_bias() const { return cvec(offset_fc2_b(), a()); }

  bool all_finite() const { return values_.allFinite(); }

 private:
  Eigen::Index o() const { return shape_.observation; }
  Eigen::Index h() const { return shape_.hidden; }
  Eigen::Index a() const { return shape_.actions; }
  Eigen::Index offset_fc1_w() const { return 0; }
  Eigen::Index offset_fc1_b() const { return h() * o(); }
  Eigen::Index offset_gru_w() const { return offset_fc1_b() + h(); }
  Eigen::Index offset_gru_u() const { return offset_gru_w() + 3 * h() * h(); }
  Eigen::Index offset_gru_b() const { return offset_gru_u() + 3 * h() * h(); }
  Eigen::Index offset_fc2_w() const { return offset_gru_b() + 3 * h(); }
  Eigen::Index offset_fc2_b() const { return offset_fc2_w() + a() * h(); }

  MatrixMap mat(Eigen::Index off, Eigen::Index r, Eigen::Index c) { return MatrixMap(values_.data() + off, r, c); }
  ConstMatrixMap cmat(Eigen::Index off, Eigen::Index r, Eigen::Index c) const {
    return ConstMatrixMap(values_.data() + off, r, c);
  }
  VectorMap vec(Eigen::Index off, Eigen::Index n) { return VectorMap(values_.data() + off, n); }
  ConstVectorMap cvec(Eigen::Index off, Eigen::Index n) const { return ConstVectorMap(values_.data() + off, n); }

  QNetShape shape_;
  Vector values_;
};

using QNetParamsd = QNetParams<double>;

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
template <typename Scalar>
QNetParams<Scalar> init_params(std::uint64_t seed, QNetShape shape = {}) {
  QNetParams<Scalar> p(shape);
  Rng rng(seed);
  auto fill = [&rng](auto&& m, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(u(rng));
  };
  fill(p.fc1_weight(), shape.observation);
  fill(p.gru_input(), shape.hidden);
  fill(p.gru_recurrent(), shape.hidden);
  fill(p.fc2_weight(), shape.hidden);
  return p;
}

template <typename Scalar>
typename QNetParams<Scalar>::Vector flatten(const QNetParams<Scalar>& params) {
  return params.flat();
}

template <typename Scalar>
QNetParams<Scalar> unflatten(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, QNetShape shape = {}) {
  return QNetParams<Scalar>(shape, values);
}

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return S(1) / (S(1) + (-x).exp());
}

template <typename Scalar>
void check_finite(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m, const char* where) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + where);
}

}  // namespace detail

/// One recurrent step for a batch of columns. `observations` is obs x B, `hidden` is hidden x B.
/// Returns (q: actions x B, next hidden: hidden x B).
template <typename Scalar, typename ObsDerived, typename HiddenDerived>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
forward(const QNetParams<Scalar>& p, const Eigen::MatrixBase<ObsDerived>& observations,
        const Eigen::MatrixBase<HiddenDerived>& hidden) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index h = p.shape().hidden;
  if (observations.rows() != p.shape().observation) throw DomainError("forward: observation size mismatch");
  if (hidden.rows() != h || hidden.cols() != observations.cols()) throw DomainError("forward: hidden state shape mismatch");

  const Matrix x = (p.fc1_weight() * observations).colwise() + p.fc1_bias();
  Matrix gates = (p.gru_input() * x).colwise() + p.gru_bias();
  gates.topRows(2 * h).noalias() += p.gru_recurrent().topRows(2 * h) * hidden;
  const Matrix z = detail::sigmoid(gates.topRows(h).array()).matrix();
  const Matrix r = detail::sigmoid(gates.middleRows(h, h).array()).matrix();
  const Matrix rh = r.cwiseProduct(hidden);
  const Matrix candidate =
      (gates.bottomRows(h) + p.gru_recurrent().bottomRows(h) * rh).array().tanh().matrix();
  Matrix next = hidden + z.cwiseProduct(candidate - hidden);
  Matrix q = (p.fc2_weight() * next.cwiseMax(Scalar(0))).colwise() + p.fc2_bias();
  detail::check_finite<Scalar>(q, "forward Q-values");
  detail::check_finite<Scalar>(next, "forward hidden state");
  return {std::move(q), std::move(next)};
}

/// A batch of equal-length sequences, time-major: observations[t] is obs x B.
template <typename Scalar>
struct SequenceBatch {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> observations;
  Eigen::MatrixXi actions;  ///< T x B taken action indices
  Matrix targets;           ///< T x B TD targets for the taken actions

  Eigen::Index steps() const { return static_cast<Eigen::Index>(observations.size()); }
  Eigen::Index batch() const { return observations.empty() ? 0 : observations.front().cols(); }
};

/// Q-values for every step of every sequence, unrolled from a zero hidden state.
template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> unroll(
    const QNetParams<Scalar>& p, const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& observations) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> qs;
  qs.reserve(observations.size());
  if (observations.empty()) return qs;
  Matrix hidden = Matrix::Zero(p.shape().hidden, observations.front().cols());
  for (const auto& o : observations) {
    auto [q, next] = forward(p, o, hidden);
    qs.push_back(std::move(q));
    hidden = std::move(next);
  }
  return qs;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss;
  QNetParams<Scalar> gradient;
};

/// Mean squared TD error over all (step, sequence) pairs of the taken actions, and its gradient
/// by backpropagation through the full recurrence from a zero initial hidden state.
template <typename Scalar>
LossAndGradient<Scalar> bptt_gradients(const QNetParams<Scalar>& p, const SequenceBatch<Scalar>& batch) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index T = batch.steps();
  const Eigen::Index B = batch.batch();
  const Eigen::Index h = p.shape().hidden;
  if (T == 0 || B == 0) throw DomainError("bptt_gradients: empty batch");
  if (batch.actions.rows() != T || batch.actions.cols() != B || batch.targets.rows() != T || batch.targets.cols() != B)
    throw DomainError("bptt_gradients: actions/targets shape mismatch");
  if (!batch.targets.allFinite()) throw NumericalError("bptt_gradients: non-finite TD targets");

  struct Step {
    Matrix x, h_prev, z, r, candidate, h;
  };
  std::vector<Step> steps(static_cast<std::size_t>(T));

  // Forward, caching activations.
  Matrix hidden = Matrix::Zero(h, B);
  Scalar loss = 0;
  const Scalar scale = Scalar(2) / Scalar(T * B);
  std::vector<Matrix> dq(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    Step& s = steps[static_cast<std::size_t>(t)];
    const auto& o = batch.observations[static_cast<std::size_t>(t)];
    if (o.cols() != B) throw DomainError("bptt_gradients: ragged batch");
    s.x = (p.fc1_weight() * o).colwise() + p.fc1_bias();
    Matrix gates = (p.gru_input() * s.x).colwise() + p.gru_bias();
    gates.topRows(2 * h).noalias() += p.gru_recurrent().topRows(2 * h) * hidden;
    s.z = detail::sigmoid(gates.topRows(h).array()).matrix();
    s.r = detail::sigmoid(gates.middleRows(h, h).array()).matrix();
    s.candidate = (gates.bottomRows(h) + p.gru_recurrent().bottomRows(h) * s.r.cwiseProduct(hidden)).array().tanh().matrix();
    s.h_prev = std::move(hidden);
    s.h = s.h_prev + s.z.cwiseProduct(s.candidate - s.h_prev);
    hidden = s.h;

    const Matrix q = (p.fc2_weight() * s.h.cwiseMax(Scalar(0))).colwise() + p.fc2_bias();
    Matrix& d = dq[static_cast<std::size_t>(t)];
    d = Matrix::Zero(p.shape().actions, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const int a = batch.actions(t, b);
      if (a < 0 || a >= p.shape().actions) throw DomainError("bptt_gradients: action index out of range");
      const Scalar err = q(a, b) - batch.targets(t, b);
      loss += err * err;
      d(a, b) = scale * err;
    }
  }
  loss /= Scalar(T * B);
  if (!std::isfinite(static_cast<double>(loss))) throw NumericalError("bptt_gradients: non-finite loss");

  QNetParams<Scalar> g(p.shape());
  auto g_w1 = g.fc1_weight();
  auto g_b1 = g.fc1_bias();
  auto g_w = g.gru_input();
  auto g_u = g.gru_recurrent();
  auto g_b = g.gru_bias();
  auto g_w2 = g.fc2_weight();
  auto g_b2 = g.fc2_bias();
  const auto u_zr = p.gru_recurrent().topRows(2 * h);
  const auto u_c = p.gru_recurrent().bottomRows(h);

  Matrix dh_next = Matrix::Zero(h, B);
  Matrix dgates(3 * h, B);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Step& s = steps[static_cast<std::size_t>(t)];
    const Matrix& d = dq[static_cast<std::size_t>(t)];
    const auto& o = batch.observations[static_cast<std::size_t>(t)];

    g_w2.noalias() += d * s.h.cwiseMax(Scalar(0)).transpose();
    g_b2 += d.rowwise().sum();
    Matrix dh = (p.fc2_weight().transpose() * d).cwiseProduct((s.h.array() > Scalar(0)).template cast<Scalar>().matrix());
    dh += dh_next;

    // h = (1 - z) h_prev + z * candidate
    const Matrix dcandidate = dh.cwiseProduct(s.z);
    const Matrix dz = dh.cwiseProduct(s.candidate - s.h_prev);
    Matrix dh_prev = dh - dcandidate;  // dh * (1 - z)

    auto da_c = dgates.bottomRows(h);
    da_c = dcandidate.cwiseProduct((Scalar(1) - s.candidate.array().square()).matrix());
    const Matrix rh = s.r.cwiseProduct(s.h_prev);
    g_u.bottomRows(h).noalias() += da_c * rh.transpose();
    const Matrix drh = u_c.transpose() * da_c;
    dh_prev += drh.cwiseProduct(s.r);
    const Matrix dr = drh.cwiseProduct(s.h_prev);

    dgates.topRows(h) = dz.cwiseProduct(s.z.cwiseProduct((Scalar(1) - s.z.array()).matrix()));
    dgates.middleRows(h, h) = dr.cwiseProduct(s.r.cwiseProduct((Scalar(1) - s.r.array()).matrix()));
    g_u.topRows(2 * h).noalias() += dgates.topRows(2 * h) * s.h_prev.transpose();
    dh_prev.noalias() += u_zr.transpose() * dgates.topRows(2 * h);

    g_w.noalias() += dgates * s.x.transpose();
    g_b += dgates.rowwise().sum();
    const Matrix dx = p.gru_input().transpose() * dgates;
    g_w1.noalias() += dx * o.transpose();
    g_b1 += dx.rowwise().sum();

    dh_next = std::move(dh_prev);
  }
  if (!g.all_finite()) throw NumericalError("bptt_gradients: non-finite gradient");
  return {loss, std::move(g)};
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates, shaped like the flat parameter vector.
template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector m;
  Vector v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(Eigen::Index size) : m(Vector::Zero(size)), v(Vector::Zero(size)) {}
};

/// One bias-corrected Adam update, in place.
template <typename Scalar>
void adam_step(QNetParams<Scalar>& params, const QNetParams<Scalar>& gradient, AdamState<Scalar>& state,
               const AdamConfig& cfg = {}) {
  const Eigen::Index n = params.flat().size();
  if (gradient.flat().size() != n || state.m.size() != n || state.v.size() != n)
    throw DomainError("adam_step: shape mismatch");
  const auto& g = gradient.flat();
  state.step += 1;
  const Scalar b1 = static_cast<Scalar>(cfg.beta1), b2 = static_cast<Scalar>(cfg.beta2);
  state.m = b1 * state.m + (Scalar(1) - b1) * g;
  state.v = b2 * state.v + (Scalar(1) - b2) * g.cwiseProduct(g);
  const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(state.step));
  const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
  const Scalar eps = static_cast<Scalar>(cfg.epsilon);
  params.flat().array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

}  // namespace uhpnf
