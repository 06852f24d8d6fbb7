#include "uhpnf/federation.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>

#include <zlib.h>

#include "uhpnf/errors.hpp"

namespace uhpnf {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> serialize_body(const ParamSnapshot& s) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * s.dims.size() + 4 * s.values.size());
  out.insert(out.end(), kSnapshotMagic.begin(), kSnapshotMagic.end());
  put_u32(out, s.version);
  put_u32(out, static_cast<std::uint32_t>(s.dims.size()));
  for (auto d : s.dims) put_u32(out, d);
  for (float v : s.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::size_t expected_values(const std::vector<std::uint32_t>& dims) {
  if (dims.size() != 4 || dims[1] != dims[2]) return 0;
  return static_cast<std::size_t>(QNetShape{static_cast<int>(dims[0]), static_cast<int>(dims[2]),
                                            static_cast<int>(dims[3])}
                                      .param_count());
}

}  // namespace

QNetShape ParamSnapshot::shape() const {
  if (expected_values(dims) == 0 || expected_values(dims) != values.size())
    throw SnapshotError(SnapshotErrc::ArchitectureMismatch, "snapshot: architecture descriptor does not match payload");
  return QNetShape{static_cast<int>(dims[0]), static_cast<int>(dims[2]), static_cast<int>(dims[3])};
}

std::uint32_t ParamSnapshot::checksum() const { return crc32_of(serialize_body(*this)); }

ParamSnapshot make_snapshot(const QNetParamsd& params, int agent, std::int64_t episode) {
  const QNetShape& s = params.shape();
  ParamSnapshot snap;
  snap.dims = {static_cast<std::uint32_t>(s.observation), static_cast<std::uint32_t>(s.hidden),
               static_cast<std::uint32_t>(s.hidden), static_cast<std::uint32_t>(s.actions)};
  snap.values.resize(static_cast<std::size_t>(params.flat().size()));
  Eigen::Map<Eigen::VectorXf>(snap.values.data(), params.flat().size()) = params.flat().cast<float>();
  snap.provenance = {Provenance{agent, episode}};
  return snap;
}

QNetParamsd to_params(const ParamSnapshot& snapshot) {
  const QNetShape shape = snapshot.shape();
  Eigen::VectorXd v =
      Eigen::Map<const Eigen::VectorXf>(snapshot.values.data(), static_cast<Eigen::Index>(snapshot.values.size()))
          .cast<double>();
  return QNetParamsd(shape, std::move(v));
}

std::vector<std::uint8_t> serialize(const ParamSnapshot& snapshot) {
  (void)snapshot.shape();
  std::vector<std::uint8_t> out = serialize_body(snapshot);
  put_u32(out, crc32_of(out));
  return out;
}

ParamSnapshot deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kSnapshotMagic.data(), 4) != 0)
    throw SnapshotError(SnapshotErrc::BadMagic, "snapshot: bad magic");
  if (bytes.size() < 12) throw SnapshotError(SnapshotErrc::BadLength, "snapshot: truncated header");
  ParamSnapshot s;
  s.version = get_u32(bytes, 4);
  if (s.version != kSnapshotVersion)
    throw SnapshotError(SnapshotErrc::BadVersion, "snapshot: unsupported version " + std::to_string(s.version));
  const std::uint32_t layers = get_u32(bytes, 8);
  std::size_t at = 12;
  if (layers > 64 || bytes.size() < at + 4ull * layers)
    throw SnapshotError(SnapshotErrc::BadLength, "snapshot: truncated layer table");
  for (std::uint32_t i = 0; i < layers; ++i, at += 4) s.dims.push_back(get_u32(bytes, at));
  const std::size_t count = expected_values(s.dims);
  if (count == 0) throw SnapshotError(SnapshotErrc::ArchitectureMismatch, "snapshot: unknown architecture descriptor");
  if (bytes.size() != at + 4 * count + 4)
    throw SnapshotError(SnapshotErrc::BadLength, "snapshot: payload length " + std::to_string(bytes.size()) +
                                                     " does not match architecture");
  const std::uint32_t stored = get_u32(bytes, at + 4 * count);
  if (stored != crc32_of(bytes.first(at + 4 * count)))
    throw SnapshotError(SnapshotErrc::BadChecksum, "snapshot: checksum mismatch");
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i, at += 4) s.values[i] = std::bit_cast<float>(get_u32(bytes, at));
  return s;
}

void write_snapshot(const std::filesystem::path& path, const ParamSnapshot& snapshot) {
  const auto bytes = serialize(snapshot);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ParamSnapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

ParamSnapshot fedavg(std::span<const ParamSnapshot> snapshots, std::span<const double> weights) {
  if (snapshots.empty()) throw SnapshotError(SnapshotErrc::Empty, "fedavg: no snapshots");
  if (weights.size() != snapshots.size()) throw DomainError("fedavg: one weight per snapshot required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("fedavg: weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("fedavg: weights sum to zero");

  const auto& first = snapshots.front();
  (void)first.shape();
  const auto n = static_cast<Eigen::Index>(first.values.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  ParamSnapshot out;
  out.dims = first.dims;
  // Accumulate in a canonical order so the result is bit-identical under any permutation of
  // the (snapshot, weight) pairs.
  std::vector<std::size_t> order(snapshots.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weights[a] != weights[b]) return weights[a] < weights[b];
    return snapshots[a].values < snapshots[b].values;
  });
  for (std::size_t k : order) {
    const auto& s = snapshots[k];
    if (s.dims != first.dims || s.values.size() != first.values.size())
      throw SnapshotError(SnapshotErrc::ArchitectureMismatch, "fedavg: architecture mismatch between snapshots");
    acc += (weights[k] / total) * Eigen::Map<const Eigen::VectorXf>(s.values.data(), n).cast<double>();
    out.provenance.insert(out.provenance.end(), s.provenance.begin(), s.provenance.end());
  }
  out.values.resize(static_cast<std::size_t>(n));
  Eigen::Map<Eigen::VectorXf>(out.values.data(), n) = acc.cast<float>();
  return out;
}

ParamSnapshot fedavg(std::span<const ParamSnapshot> snapshots) {
  const std::vector<double> equal(snapshots.size(), 1.0);
  return fedavg(snapshots, equal);
}

void SinkConfig::validate() const {
  if (sync_period < 1) throw DomainError("federation: sync period must be at least 1");
  if (window < 1) throw DomainError("federation: detection window must be at least 1");
}

std::optional<ParamSnapshot> sink_round(std::span<QNetParamsd* const> agents, std::int64_t episode,
                                        const SinkConfig& config) {
  if (episode <= 0 || episode % config.sync_period != 0) return std::nullopt;
  std::vector<ParamSnapshot> collected;
  collected.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i] == nullptr) {
      std::cerr << "warning: sink round at episode " << episode << " skipped, agent " << i
                << " did not report a snapshot\n";
      return std::nullopt;
    }
    collected.push_back(make_snapshot(*agents[i], static_cast<int>(i), episode));
  }
  if (collected.empty()) return std::nullopt;
  ParamSnapshot aggregate = fedavg(collected);
  const QNetParamsd broadcast = to_params(aggregate);
  for (QNetParamsd* a : agents) *a = broadcast;
  return aggregate;
}

LinkMonitor::LinkMonitor(int n, int window) : n_(n), window_(window) {
  if (n < 1 || window < 1) throw DomainError("LinkMonitor: n and window must be positive");
}

void LinkMonitor::record(const SlotMetrics& metrics) {
  Entry e;
  e.attempted.resize(static_cast<std::size_t>(n_));
  e.success.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    e.attempted[static_cast<std::size_t>(i)] = metrics.powers_w[i] > 0.0;
    e.success[static_cast<std::size_t>(i)] = metrics.success[static_cast<std::size_t>(i)];
  }
  slots_.push_back(std::move(e));
  while (static_cast<int>(slots_.size()) > window_) slots_.pop_front();
}

std::optional<double> LinkMonitor::success_rate(int node) const {
  int attempts = 0, successes = 0;
  for (const auto& e : slots_) {
    attempts += e.attempted[static_cast<std::size_t>(node)];
    successes += e.success[static_cast<std::size_t>(node)];
  }
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(successes) / attempts;
}

std::optional<Broadcast> detect_and_restore(const LinkMonitor& monitor, const std::optional<ParamSnapshot>& latest,
                                            const SinkConfig& config) {
  if (!latest || !monitor.ready()) return std::nullopt;
  std::vector<int> dead;
  double sum = 0.0;
  int active = 0;
  for (int i = 0; i < monitor.size(); ++i) {
    const auto rate = monitor.success_rate(i);
    if (!rate) continue;
    sum += *rate;
    ++active;
    if (*rate < config.dead_threshold) dead.push_back(i);
  }
  if (dead.empty() || active == 0 || sum / active <= config.healthy_threshold) return std::nullopt;
  Broadcast b{*latest, {}};
  for (int i = 0; i < monitor.size(); ++i)
    if (std::find(dead.begin(), dead.end(), i) == dead.end()) b.recipients.push_back(i);
  return b;
}

}  // namespace uhpnf
