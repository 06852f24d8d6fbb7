#include <cmath>
#include <random>

#include "doctest.h"
#include "uhpnf/channel.hpp"
#include "uhpnf/topology.hpp"

using namespace uhpnf;

namespace {

// Agreement to 6 significant digits.
bool sig6(double got, double want) { return std::abs(got - want) <= 5e-6 * std::abs(want); }

ChannelParams at_10khz() {
  ChannelParams p;
  p.carrier_khz = 10.0;
  return p;
}

}  // namespace

TEST_CASE("thorp absorption anchors") {
  CHECK(sig6(thorp_absorption(1.0), 0.0690040));
  CHECK(sig6(thorp_absorption(10.0), 1.18703));
  CHECK(thorp_absorption(1e-9) == doctest::Approx(0.003).epsilon(1e-9));
  CHECK_THROWS_AS(thorp_absorption(0.0), DomainError);
  CHECK_THROWS_AS(thorp_absorption(-1.0), DomainError);
}

TEST_CASE("thorp absorption is strictly increasing on (0, 100] kHz") {
  double prev = thorp_absorption(0.01);
  for (double f = 0.02; f <= 100.0; f += 0.01) {
    const double a = thorp_absorption(f);
    REQUIRE(a > prev);
    prev = a;
  }
}

TEST_CASE("transmission loss") {
  const ChannelParams p = at_10khz();
  // No spreading loss at the reference distance; only one metre of absorption remains.
  CHECK(transmission_loss(1.0, p) == doctest::Approx(thorp_absorption(10.0) / 1000.0).epsilon(1e-12));
  CHECK(transmission_loss(1.0, p) < 0.01);
  CHECK(sig6(transmission_loss(1000.0, p), 46.1870));
  CHECK(sig6(transmission_loss(2000.0, p), 51.8895));
  CHECK_THROWS_AS(transmission_loss(0.5, p), DomainError);

  double prev = transmission_loss(1.0, p);
  for (double d = 2.0; d < 10000.0; d *= 1.07) {
    const double tl = transmission_loss(d, p);
    REQUIRE(tl > prev);
    prev = tl;
  }
}

TEST_CASE("noise level") {
  ChannelParams p;
  p.carrier_khz = 1.0;
  p.bandwidth_hz = 1.0;
  CHECK(noise_level(p) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(sig6(noise_level(ChannelParams{}), 66.5815));
  p.carrier_khz = 10.0;
  p.bandwidth_hz = 10'000.0;
  CHECK(noise_level(p) == doctest::Approx(72.0).epsilon(1e-12));
}

TEST_CASE("channel params are validated") {
  ChannelParams p;
  CHECK_NOTHROW(p.validate());
  p.spreading = 2.5;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.success_threshold = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.bandwidth_hz = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("gain matrix") {
  const ChannelParams p = at_10khz();
  SUBCASE("one metre gives (almost) unit gain") {
    Topology::Positions tx(1, 3), rx(1, 3);
    tx << 0, 0, 0;
    rx << 0, 0, 1;
    const GainMatrix g = gain_matrix(Topology(tx, rx, 10.0, 1.0), p);
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(g(0, 0) == std::pow(10.0, -thorp_absorption(10.0) / 10'000.0));
  }
  SUBCASE("one kilometre") {
    Topology::Positions tx(1, 3), rx(1, 3);
    tx << 0, 0, 0;
    rx << 0, 0, 1000;
    const GainMatrix g = gain_matrix(Topology(tx, rx, 10.0, 1000.0), p);
    CHECK(g(0, 0) == doctest::Approx(2.406e-5).epsilon(5e-4));
    CHECK(g(0, 0) == std::pow(10.0, -transmission_loss(1000.0, p) / 10.0));
  }
  SUBCASE("mirror placement is symmetric") {
    Topology::Positions tx(2, 3), rx(2, 3);
    tx << -500, 0, 0, 500, 0, 0;
    rx << -300, 0, 1000, 300, 0, 1000;
    const GainMatrix g = gain_matrix(Topology(tx, rx, 1000.0, 1000.0), p);
    CHECK(g(0, 1) == g(1, 0));
    CHECK(g(0, 0) == g(1, 1));
  }
  SUBCASE("entries match 10^(-TL/10) within 1 ulp") {
    const Topology topo = place_cylinder(5, 4000.0, 1000.0, Placement::UniformRandom, 9);
    const GainMatrix g = gain_matrix(topo, p);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double want = std::pow(10.0, -transmission_loss(topo.link_distance(i, j), p) / 10.0);
        CHECK(g(i, j) > 0.0);
        CHECK(std::abs(g(i, j) - want) <= std::nextafter(want, 1.0) - want);
      }
  }
  SUBCASE("co-located ends are rejected") {
    Topology::Positions tx(1, 3), rx(1, 3);
    tx << 0, 0, 0;
    rx << 0.5, 0, 0;
    CHECK_THROWS_AS(gain_matrix(Topology(tx, rx, 10.0, 1.0), p), DomainError);
  }
}

TEST_CASE("sinr") {
  const ChannelParams p;
  const Topology topo = place_cylinder(5, 4000.0, 1000.0, Placement::Deterministic, 0);
  const GainMatrix g = gain_matrix(topo, p);

  SUBCASE("all silent") { CHECK(sinr(Eigen::VectorXd::Zero(5), g, p).isZero(0.0)); }

  SUBCASE("single link matches the link budget") {
    Eigen::VectorXd powers = Eigen::VectorXd::Zero(5);
    powers[2] = 16.0;
    const Eigen::VectorXd s = sinr(powers, g, p);
    const double d = topo.link_distance(2, 2);
    const double want_db = p.source_level_offset_db + 10.0 * std::log10(16.0) - transmission_loss(d, p) - noise_level(p);
    CHECK(sig6(10.0 * std::log10(s[2]), want_db));
    for (int i : {0, 1, 3, 4}) CHECK(s[i] == 0.0);
  }

  SUBCASE("hand-computed two-link interference") {
    Eigen::VectorXd powers = Eigen::VectorXd::Zero(5);
    powers[0] = 64.0;
    powers[1] = 8.0;
    const Eigen::VectorXd s = sinr(powers, g, p);
    const double n_lin = std::pow(10.0, noise_level(p) / 10.0);
    auto src = [&](double w) { return std::pow(10.0, (p.source_level_offset_db + 10.0 * std::log10(w)) / 10.0); };
    CHECK(s[0] == doctest::Approx(src(64) * g(0, 0) / (n_lin + src(8) * g(0, 1))).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(src(8) * g(1, 1) / (n_lin + src(64) * g(1, 0))).epsilon(1e-12));
  }

  SUBCASE("symmetric links at equal power") {
    const Topology two = place_cylinder(2, 4000.0, 1000.0, Placement::Deterministic, 0);
    const Eigen::VectorXd s = sinr(Eigen::VectorXd::Constant(2, 8.0), gain_matrix(two, p), p);
    CHECK(s[0] == doctest::Approx(s[1]).epsilon(1e-12));
  }

  SUBCASE("negative power rejected") {
    Eigen::VectorXd powers = Eigen::VectorXd::Zero(5);
    powers[3] = -1.0;
    CHECK_THROWS_AS(sinr(powers, g, p), DomainError);
  }

  SUBCASE("non-increasing in any interferer's power") {
    std::mt19937_64 rng(3);
    const double levels[] = {0, 2, 4, 8, 16, 32, 64};
    std::uniform_int_distribution<int> pick(0, 6), node(0, 4);
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::VectorXd powers(5);
      for (int i = 0; i < 5; ++i) powers[i] = levels[pick(rng)];
      const int j = node(rng);
      Eigen::VectorXd louder = powers;
      louder[j] = std::min(64.0, std::max(2.0, powers[j] * 2.0));
      const Eigen::VectorXd a = sinr(powers, g, p), b = sinr(louder, g, p);
      for (int i = 0; i < 5; ++i)
        if (i != j) REQUIRE(b[i] <= a[i]);
    }
  }
}

TEST_CASE("shannon rate") {
  CHECK(shannon_rate(0.0, 10'000.0) == 0.0);
  CHECK(shannon_rate(1.0, 10'000.0) == doctest::Approx(10'000.0).epsilon(1e-12));
  CHECK(shannon_rate(3.0, 10'000.0) == doctest::Approx(20'000.0).epsilon(1e-12));
  CHECK_THROWS_AS(shannon_rate(-0.1, 10'000.0), DomainError);
  double prev = 0.0;
  for (double s = 0.01; s < 1e4; s *= 1.3) {
    const double r = shannon_rate(s, 10'000.0);
    REQUIRE(r > prev);
    prev = r;
  }
}

TEST_CASE("jain fairness") {
  CHECK(jain_fairness(Eigen::Vector3d(5, 5, 5)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jain_fairness(Eigen::Vector4d(7, 0, 0, 0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(sig6(jain_fairness(Eigen::Vector3d(1, 2, 3)), 0.857143));
  CHECK_THROWS_AS(jain_fairness(Eigen::Vector3d::Zero()), DomainError);
  CHECK_THROWS_AS(jain_fairness(Eigen::Vector2d(1, -1)), DomainError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0), scale(0.01, 100.0);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    x[0] += 1e-3;
    const double j = jain_fairness(x);
    REQUIRE(j >= 1.0 / n - 1e-12);
    REQUIRE(j <= 1.0 + 1e-12);
    const Eigen::VectorXd y = scale(rng) * x;
    REQUIRE(jain_fairness(y) == doctest::Approx(j).epsilon(1e-12));
  }
}
