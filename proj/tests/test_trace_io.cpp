#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "uhpnf/baselines.hpp"
#include "uhpnf/errors.hpp"
#include "uhpnf/trace_io.hpp"
#include "uhpnf/twin.hpp"

using namespace uhpnf;

namespace {

const char* kHeader = "run,slot,node,action_W,sinr_db,bits,reward,concurrent_count";

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    out.push_back(f);
  }
  return out;
}

std::vector<EpisodeTrace> sample_traces(int runs, double eps) {
  Scenario s;
  s.runs = runs;
  s.episode.epsilon_fail = eps;
  return simulate([](std::uint64_t seed) { return make_static_policy(BaselineKind::Random, seed); }, s);
}

std::filesystem::path temp(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("format_double round trips") {
  for (double x : {0.0, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 66.58146007804834}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(0.2) == "0.2");
}

TEST_CASE("empty trace exports a header-only CSV") { CHECK(trace_csv({}) == std::string(kHeader) + "\n"); }

TEST_CASE("one 60-slot, 5-node run gives 300 rows") {
  const auto traces = sample_traces(1, 0.0);
  const std::string csv = trace_csv(traces);
  CHECK(csv.rfind(kHeader, 0) == 0);
  const auto r = rows(csv);
  REQUIRE(r.size() == 300u);
  for (const auto& f : r) REQUIRE(f.size() == 8u);
}

TEST_CASE("CSV numeric columns parse back without loss") {
  const auto traces = sample_traces(2, 0.2);
  const auto r = rows(trace_csv(traces));
  std::size_t k = 0;
  for (std::size_t run = 0; run < traces.size(); ++run)
    for (const auto& slot : traces[run].slots)
      for (int i = 0; i < traces[run].n; ++i, ++k) {
        const auto& f = r[k];
        REQUIRE(std::stoul(f[0]) == run);
        REQUIRE(std::stod(f[3]) == slot.metrics.powers_w[i]);
        REQUIRE(std::stod(f[5]) == slot.metrics.bits[i]);
        REQUIRE(std::stod(f[6]) == slot.team_reward);
        REQUIRE(std::stoi(f[7]) == slot.metrics.concurrent);
        if (slot.metrics.sinr[i] > 0.0)
          REQUIRE(std::stod(f[4]) == 10.0 * std::log10(slot.metrics.sinr[i]));
        else
          REQUIRE(f[4] == "-inf");
      }
}

TEST_CASE("trace files round trip") {
  const auto traces = sample_traces(3, 0.2);
  const auto path = temp("uhpnf_test_trace.json");
  write_trace(path, traces);
  const auto back = read_trace(path);
  REQUIRE(back.size() == traces.size());
  CHECK(back[1].failures.failed == traces[1].failures.failed);
  CHECK(trace_csv(back) == trace_csv(traces));
  std::filesystem::remove(path);
}

TEST_CASE("malformed traces are rejected") {
  const auto path = temp("uhpnf_test_bad_trace.json");
  for (const char* text : {"not json", R"({"format":"other","version":1,"runs":[]})",
                           R"({"format":"uhpnf-trace","version":1,"runs":[{"n":2,"failed":[false],"slots":[]}]})",
                           R"({"format":"uhpnf-trace","version":1,"runs":[{"n":1,"failed":[false],"slots":[{"actions":[1,2]}]}]})"}) {
    std::ofstream(path) << text;
    CHECK_THROWS_AS(read_trace(path), IoError);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_trace(path), IoError);
}
