#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "uhpnf/config.hpp"
#include "uhpnf/errors.hpp"

using namespace uhpnf;

namespace {

int error_line(const std::string& text) {
  try {
    RunConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  FAIL("no error raised");
  return -1;
}

}  // namespace

TEST_CASE("defaults survive an empty file") {
  const RunConfig c = RunConfig::parse("# nothing\n\n");
  CHECK(c.scenario.n == 5);
  CHECK(c.scenario.episode.slots == 60);
  CHECK(c.train.episodes == 300'000);
  CHECK(c.federation.sync_period == 100);
}

TEST_CASE("every namespace parses") {
  const RunConfig c = RunConfig::parse(
      "channel.carrier_khz = 10\n"
      "topology.n = 3   # trailing comment\n"
      "topology.placement = uniform\n"
      "scenario.objective = fairness\n"
      "scenario.epsilon_fail = 0.2\n"
      "scenario.seed = 18446744073709551615\n"
      "train.gamma = 0.9\n"
      "train.episodes = 20000\n"
      "federation.responsive = true\n");
  CHECK(c.scenario.channel.carrier_khz == 10.0);
  CHECK(c.scenario.n == 3);
  CHECK(c.scenario.placement == Placement::UniformRandom);
  CHECK(c.scenario.episode.objective == Objective::MaxFairness);
  CHECK(c.scenario.episode.epsilon_fail == 0.2);
  CHECK(c.scenario.seed == 18446744073709551615ULL);
  CHECK(c.train.gamma == 0.9);
  CHECK(c.train.episodes == 20000);
  CHECK(c.federation.responsive);
}

TEST_CASE("errors carry line numbers") {
  CHECK(error_line("topology.n = 3\n\ntopology.raduis = 4000\n") == 3);
  CHECK(error_line("topology.n = three\n") == 1);
  CHECK(error_line("topology.n = 3\ntopology.n = 4\n") == 2);
  CHECK(error_line("# c\njust words\n") == 2);
  CHECK(error_line("federation.responsive = maybe\n") == 1);
  CHECK(error_line("scenario.objective = latency\n") == 1);
  CHECK(error_line("train.gamma = 0.5x\n") == 1);
}

TEST_CASE("semantic validation") {
  CHECK_THROWS_AS(RunConfig::parse("topology.n = 0\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("channel.spreading = 3\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("federation.sync_period = 0\n"), ConfigError);
}

TEST_CASE("key table") {
  const auto keys = RunConfig::keys();
  for (const char* k : {"channel.bandwidth_hz", "topology.radius", "scenario.runs", "train.minibatch", "federation.window"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
  RunConfig c;
  CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/uhpnf.cfg"), IoError);
}

TEST_CASE("shipped default.cfg lists every key at its built-in value") {
  const std::filesystem::path path = std::filesystem::path(UHPNF_SOURCE_DIR) / "configs" / "default.cfg";
  const RunConfig c = RunConfig::load(path);
  std::ifstream in(path);
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  for (const auto& k : RunConfig::keys()) CHECK_MESSAGE(text.find("\n" + k + " = ") != std::string::npos, k);

  const RunConfig d;
  CHECK(c.scenario.channel.carrier_khz == d.scenario.channel.carrier_khz);
  CHECK(c.scenario.channel.bandwidth_hz == d.scenario.channel.bandwidth_hz);
  CHECK(c.scenario.channel.spreading == d.scenario.channel.spreading);
  CHECK(c.scenario.channel.sound_speed == d.scenario.channel.sound_speed);
  CHECK(c.scenario.channel.source_level_offset_db == d.scenario.channel.source_level_offset_db);
  CHECK(c.scenario.channel.success_threshold == d.scenario.channel.success_threshold);
  CHECK(c.scenario.n == d.scenario.n);
  CHECK(c.scenario.radius == d.scenario.radius);
  CHECK(c.scenario.height == d.scenario.height);
  CHECK(c.scenario.placement == d.scenario.placement);
  CHECK(c.scenario.episode.slots == d.scenario.episode.slots);
  CHECK(c.scenario.episode.slot_duration == d.scenario.episode.slot_duration);
  CHECK(c.scenario.episode.objective == d.scenario.episode.objective);
  CHECK(c.scenario.episode.epsilon_fail == d.scenario.episode.epsilon_fail);
  CHECK(c.scenario.episode.battery_j == d.scenario.episode.battery_j);
  CHECK(c.scenario.seed == d.scenario.seed);
  CHECK(c.scenario.runs == d.scenario.runs);
  CHECK(c.train.episodes == d.train.episodes);
  CHECK(c.train.minibatch == d.train.minibatch);
  CHECK(c.train.buffer_capacity == d.train.buffer_capacity);
  CHECK(c.train.target_update_period == d.train.target_update_period);
  CHECK(c.train.gamma == d.train.gamma);
  CHECK(c.train.epsilon_start == d.train.epsilon_start);
  CHECK(c.train.epsilon_end == d.train.epsilon_end);
  CHECK(c.train.epsilon_decay_episodes == d.train.epsilon_decay_episodes);
  CHECK(c.train.learning_rate == d.train.learning_rate);
  CHECK(c.train.train_every == d.train.train_every);
  CHECK(c.train.curve_every == d.train.curve_every);
  CHECK(c.federation.sync_period == d.federation.sync_period);
  CHECK(c.federation.responsive == d.federation.responsive);
  CHECK(c.federation.window == d.federation.window);
  CHECK(c.federation.dead_threshold == d.federation.dead_threshold);
  CHECK(c.federation.healthy_threshold == d.federation.healthy_threshold);
}

TEST_CASE("every shipped config parses") {
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(UHPNF_SOURCE_DIR) / "configs"))
    CHECK_NOTHROW(RunConfig::load(e.path()));
}
