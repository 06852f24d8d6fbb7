#include "uhpnf/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "uhpnf/errors.hpp"

namespace uhpnf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, int line) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(line, "invalid value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(line, "invalid boolean '" + value + "' for " + key);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value, int line)>;

template <typename T, typename Member>
Setter number(Member member) {
  return [member](RunConfig& c, const std::string& k, const std::string& v, int line) {
    std::invoke(member, c) = parse_number<T>(k, v, line);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"channel.carrier_khz", number<double>([](RunConfig& c) -> double& { return c.scenario.channel.carrier_khz; })},
      {"channel.bandwidth_hz", number<double>([](RunConfig& c) -> double& { return c.scenario.channel.bandwidth_hz; })},
      {"channel.spreading", number<double>([](RunConfig& c) -> double& { return c.scenario.channel.spreading; })},
      {"channel.sound_speed", number<double>([](RunConfig& c) -> double& { return c.scenario.channel.sound_speed; })},
      {"channel.source_level_offset_db",
       number<double>([](RunConfig& c) -> double& { return c.scenario.channel.source_level_offset_db; })},
      {"channel.success_threshold",
       number<double>([](RunConfig& c) -> double& { return c.scenario.channel.success_threshold; })},
      {"topology.n", number<int>([](RunConfig& c) -> int& { return c.scenario.n; })},
      {"topology.radius", number<double>([](RunConfig& c) -> double& { return c.scenario.radius; })},
      {"topology.height", number<double>([](RunConfig& c) -> double& { return c.scenario.height; })},
      {"topology.placement",
       [](RunConfig& c, const std::string&, const std::string& v, int line) {
         try {
           c.scenario.placement = parse_placement(v);
         } catch (const DomainError& e) {
           throw ConfigError(line, e.what());
         }
       }},
      {"scenario.slots", number<int>([](RunConfig& c) -> int& { return c.scenario.episode.slots; })},
      {"scenario.slot_duration", number<double>([](RunConfig& c) -> double& { return c.scenario.episode.slot_duration; })},
      {"scenario.objective",
       [](RunConfig& c, const std::string&, const std::string& v, int line) {
         try {
           c.scenario.episode.objective = parse_objective(v);
         } catch (const DomainError& e) {
           throw ConfigError(line, e.what());
         }
       }},
      {"scenario.epsilon_fail", number<double>([](RunConfig& c) -> double& { return c.scenario.episode.epsilon_fail; })},
      {"scenario.battery_j", number<double>([](RunConfig& c) -> double& { return c.scenario.episode.battery_j; })},
      {"scenario.seed", number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.scenario.seed; })},
      {"scenario.runs", number<int>([](RunConfig& c) -> int& { return c.scenario.runs; })},
      {"train.episodes", number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.train.episodes; })},
      {"train.minibatch", number<int>([](RunConfig& c) -> int& { return c.train.minibatch; })},
      {"train.buffer_capacity", number<int>([](RunConfig& c) -> int& { return c.train.buffer_capacity; })},
      {"train.target_update_period", number<int>([](RunConfig& c) -> int& { return c.train.target_update_period; })},
      {"train.gamma", number<double>([](RunConfig& c) -> double& { return c.train.gamma; })},
      {"train.epsilon_start", number<double>([](RunConfig& c) -> double& { return c.train.epsilon_start; })},
      {"train.epsilon_end", number<double>([](RunConfig& c) -> double& { return c.train.epsilon_end; })},
      {"train.epsilon_decay_episodes",
       number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.train.epsilon_decay_episodes; })},
      {"train.learning_rate", number<double>([](RunConfig& c) -> double& { return c.train.learning_rate; })},
      {"train.train_every", number<int>([](RunConfig& c) -> int& { return c.train.train_every; })},
      {"train.curve_every", number<int>([](RunConfig& c) -> int& { return c.train.curve_every; })},
      {"federation.sync_period", number<int>([](RunConfig& c) -> int& { return c.federation.sync_period; })},
      {"federation.responsive",
       [](RunConfig& c, const std::string& k, const std::string& v, int line) {
         c.federation.responsive = parse_bool(k, v, line);
       }},
      {"federation.window", number<int>([](RunConfig& c) -> int& { return c.federation.window; })},
      {"federation.dead_threshold", number<double>([](RunConfig& c) -> double& { return c.federation.dead_threshold; })},
      {"federation.healthy_threshold",
       number<double>([](RunConfig& c) -> double& { return c.federation.healthy_threshold; })},
  };
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value, int line) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError(line, "unknown key '" + key + "'");
  it->second(*this, key, value, line);
}

void RunConfig::validate() const {
  try {
    scenario.validate();
    train.validate();
    federation.validate();
  } catch (const DomainError& e) {
    throw ConfigError(0, e.what());
  }
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(line, "expected 'key = value'");
    if (!seen.insert(key).second) throw ConfigError(line, "duplicate key '" + key + "'");
    cfg.set(key, value, line);
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

}  // namespace uhpnf
