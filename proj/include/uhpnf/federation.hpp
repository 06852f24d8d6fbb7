#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uhpnf/environment.hpp"
#include "uhpnf/qnet.hpp"

namespace uhpnf {

inline constexpr std::array<char, 4> kSnapshotMagic{'U', 'H', 'P', 'F'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Provenance {
  int agent = -1;
  std::int64_t episode = 0;
  bool operator==(const Provenance&) const = default;
};

/// The only artifact exchanged between layers: layer widths plus a 32-bit parameter vector.
///
/// Provenance is carried in memory (and in registry manifests); it is not part of the wire format.
struct ParamSnapshot {
  std::uint32_t version = kSnapshotVersion;
  std::vector<std::uint32_t> dims;  ///< {observation, fc1, gru hidden, actions}
  std::vector<float> values;
  std::vector<Provenance> provenance;

  QNetShape shape() const;
  /// CRC32 that terminates the serialized form.
  std::uint32_t checksum() const;
};

ParamSnapshot make_snapshot(const QNetParamsd& params, int agent = -1, std::int64_t episode = 0);
QNetParamsd to_params(const ParamSnapshot& snapshot);

enum class SnapshotErrc { BadMagic, BadVersion, BadLength, BadChecksum, ArchitectureMismatch, Empty };

class SnapshotError : public std::runtime_error {
 public:
  SnapshotError(SnapshotErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  SnapshotErrc code() const { return code_; }

 private:
  SnapshotErrc code_;
};

/// Wire layout, all integers little-endian:
///   "UHPF" | u32 version | u32 layer count | u32 dim... | f32 payload... | u32 CRC32 of all preceding bytes
std::vector<std::uint8_t> serialize(const ParamSnapshot& snapshot);
ParamSnapshot deserialize(std::span<const std::uint8_t> bytes);

void write_snapshot(const std::filesystem::path& path, const ParamSnapshot& snapshot);
ParamSnapshot read_snapshot(const std::filesystem::path& path);

/// Element-wise weighted mean; weights are normalized to sum 1.
ParamSnapshot fedavg(std::span<const ParamSnapshot> snapshots, std::span<const double> weights);
ParamSnapshot fedavg(std::span<const ParamSnapshot> snapshots);

struct SinkConfig {
  int sync_period = 100;  ///< K, episodes between aggregation rounds
  bool responsive = false;  ///< failure-triggered re-broadcasts between rounds
  int window = 10;  ///< slots in the failure-detection window
  double dead_threshold = 0.1;
  double healthy_threshold = 0.5;

  void validate() const;
};

/// Every K episodes: collect all agents' parameters, average with equal weights and
/// broadcast the aggregate back. A null entry means that agent's snapshot never arrived;
/// the round is then skipped with a warning. Returns the aggregate when a round ran.
std::optional<ParamSnapshot> sink_round(std::span<QNetParamsd* const> agents, std::int64_t episode,
                                        const SinkConfig& config);

/// Rolling per-link success statistics over the last `window` slots.
class LinkMonitor {
 public:
  LinkMonitor(int n, int window);

  void record(const SlotMetrics& metrics);
  void clear() { slots_.clear(); }
  bool ready() const { return static_cast<int>(slots_.size()) >= window_; }
  int size() const { return n_; }

  /// Successes over transmission attempts in the window; nullopt for a node that stayed silent.
  std::optional<double> success_rate(int node) const;

 private:
  struct Entry {
    std::vector<bool> attempted;
    std::vector<bool> success;
  };
  int n_;
  int window_;
  std::deque<Entry> slots_;
};

struct Broadcast {
  ParamSnapshot snapshot;
  std::vector<int> recipients;
};

/// Fires when some transmitting node's success rate drops below `dead_threshold` while the
/// mean over transmitting nodes exceeds `healthy_threshold`; the latest aggregate then goes
/// back out to every node not flagged dead.
std::optional<Broadcast> detect_and_restore(const LinkMonitor& monitor, const std::optional<ParamSnapshot>& latest,
                                            const SinkConfig& config);

}  // namespace uhpnf
