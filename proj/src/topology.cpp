#include "uhpnf/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "uhpnf/errors.hpp"

namespace uhpnf {

Placement parse_placement(const std::string& name) {
  if (name == "deterministic") return Placement::Deterministic;
  if (name == "uniform" || name == "uniform-random") return Placement::UniformRandom;
  throw DomainError("unknown placement mode '" + name + "'");
}

std::string to_string(Placement placement) {
  return placement == Placement::Deterministic ? "deterministic" : "uniform";
}

Topology::Topology(Positions tx, Positions rx, double radius, double height)
    : tx_(std::move(tx)), rx_(std::move(rx)), radius_(radius), height_(height) {
  if (tx_.rows() < 1) throw DomainError("topology: need at least one link");
  if (tx_.rows() != rx_.rows()) throw DomainError("topology: transmitter/receiver count mismatch");
}

Topology place_cylinder(int n, double radius, double height, Placement mode, std::uint64_t seed) {
  if (n < 1) throw DomainError("place_cylinder: n must be at least 1");
  if (!(radius > 0) || !(height > 0)) throw DomainError("place_cylinder: radius and height must be positive");

  Topology::Positions tx(n, 3), rx(n, 3);
  constexpr double kPi = std::numbers::pi;
  if (mode == Placement::Deterministic) {
    const double ring = radius / 2.0;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * i / n;
      const double b = a + kPi / n;
      tx.row(i) << ring * std::cos(a), ring * std::sin(a), 0.0;
      rx.row(i) << ring * std::cos(b), ring * std::sin(b), height;
    }
  } else {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto disk_point = [&](double z) {
      const double r = radius * std::sqrt(unit(rng));
      const double a = 2.0 * kPi * unit(rng);
      return Eigen::RowVector3d(r * std::cos(a), r * std::sin(a), z);
    };
    for (int i = 0; i < n; ++i) {
      tx.row(i) = disk_point(0.0);
      rx.row(i) = disk_point(height);
    }
  }
  return Topology(std::move(tx), std::move(rx), radius, height);
}

int FailureMask::count() const {
  return static_cast<int>(std::count(failed.begin(), failed.end(), true));
}

FailureMask sample_failures(double epsilon, int n, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("sample_failures: epsilon outside [0, 1]");
  FailureMask mask;
  mask.failed.resize(static_cast<std::size_t>(n));
  std::bernoulli_distribution fail(epsilon);
  for (int i = 0; i < n; ++i) mask.failed[static_cast<std::size_t>(i)] = fail(rng);
  return mask;
}

}  // namespace uhpnf
