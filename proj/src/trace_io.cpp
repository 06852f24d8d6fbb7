#include "uhpnf/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "uhpnf/errors.hpp"

namespace uhpnf {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

template <typename Derived>
json to_array(const Eigen::DenseBase<Derived>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd doubles(const json& a, std::size_t n, const char* field) {
  if (!a.is_array() || a.size() != n) throw IoError(std::string("malformed trace: field '") + field + "' has wrong length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void write_trace(const std::filesystem::path& path, const std::vector<EpisodeTrace>& runs) {
  json doc;
  doc["format"] = "uhpnf-trace";
  doc["version"] = 1;
  doc["runs"] = json::array();
  for (const auto& run : runs) {
    json r;
    r["n"] = run.n;
    r["failed"] = json::array();
    for (std::size_t i = 0; i < run.failures.size(); ++i) r["failed"].push_back(static_cast<bool>(run.failures[i]));
    r["slots"] = json::array();
    for (const auto& s : run.slots) {
      json j;
      j["actions"] = to_array(s.metrics.actions);
      j["powers_w"] = to_array(s.metrics.powers_w);
      j["sinr"] = to_array(s.metrics.sinr);
      j["bits"] = to_array(s.metrics.bits);
      j["team_reward"] = s.team_reward;
      j["concurrent"] = s.metrics.concurrent;
      r["slots"].push_back(std::move(j));
    }
    doc["runs"].push_back(std::move(r));
  }
  write_text_atomic(path, doc.dump() + "\n");
}

std::vector<EpisodeTrace> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path.string());
  std::vector<EpisodeTrace> runs;
  try {
    const json doc = json::parse(in);
    if (doc.value("format", "") != "uhpnf-trace" || doc.value("version", 0) != 1)
      throw IoError("malformed trace: not a uhpnf-trace version 1 document");
    for (const auto& r : doc.at("runs")) {
      EpisodeTrace t;
      t.n = r.at("n").get<int>();
      if (t.n < 1) throw IoError("malformed trace: n must be positive");
      const auto n = static_cast<std::size_t>(t.n);
      for (const auto& f : r.at("failed")) t.failures.failed.push_back(f.get<bool>());
      if (t.failures.size() != n) throw IoError("malformed trace: failure mask has wrong length");
      for (const auto& j : r.at("slots")) {
        SlotRecord s;
        const Eigen::VectorXd actions = doubles(j.at("actions"), n, "actions");
        s.metrics.actions = actions.cast<int>();
        s.metrics.powers_w = doubles(j.at("powers_w"), n, "powers_w");
        s.metrics.sinr = doubles(j.at("sinr"), n, "sinr");
        s.metrics.bits = doubles(j.at("bits"), n, "bits");
        s.team_reward = j.at("team_reward").get<double>();
        s.metrics.concurrent = j.at("concurrent").get<int>();
        t.slots.push_back(std::move(s));
      }
      if (!t.slots.empty()) t.slots.back().terminal = true;
      runs.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed trace: ") + e.what());
  }
  return runs;
}

std::string trace_csv(const std::vector<EpisodeTrace>& runs) {
  std::ostringstream out;
  out << "run,slot,node,action_W,sinr_db,bits,reward,concurrent_count\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    for (std::size_t t = 0; t < run.slots.size(); ++t) {
      const auto& s = run.slots[t];
      for (int i = 0; i < run.n; ++i) {
        const double sinr_db = s.metrics.sinr[i] > 0.0 ? 10.0 * std::log10(s.metrics.sinr[i]) : -INFINITY;
        out << r << ',' << t << ',' << i << ',' << format_double(s.metrics.powers_w[i]) << ','
            << format_double(sinr_db) << ',' << format_double(s.metrics.bits[i]) << ','
            << format_double(s.team_reward) << ',' << s.metrics.concurrent << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace uhpnf
