#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uhpnf/environment.hpp"

namespace uhpnf {

/// Shortest text that round-trips the double exactly (at most 17 significant digits).
std::string format_double(double x);

/// Writes via a temporary file and rename so readers never see a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// JSON trace file: {"format": "uhpnf-trace", "version": 1, "runs": [{"n", "failed", "slots": [...]}]}.
void write_trace(const std::filesystem::path& path, const std::vector<EpisodeTrace>& runs);
std::vector<EpisodeTrace> read_trace(const std::filesystem::path& path);

/// Per-slot, per-node CSV:
/// run,slot,node,action_W,sinr_db,bits,reward,concurrent_count
std::string trace_csv(const std::vector<EpisodeTrace>& runs);

}  // namespace uhpnf
