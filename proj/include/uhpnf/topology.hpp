#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uhpnf/rng.hpp"

namespace uhpnf {

enum class Placement { Deterministic, UniformRandom };

Placement parse_placement(const std::string& name);
std::string to_string(Placement placement);

/// Transmitters on the floor (z = 0) and receivers on the ceiling (z = height) of a
/// cylinder around the z axis. Link i is tx i -> rx i.
class Topology {
 public:
  using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

  Topology(Positions tx, Positions rx, double radius, double height);

  int size() const { return static_cast<int>(tx_.rows()); }
  const Positions& tx() const { return tx_; }
  const Positions& rx() const { return rx_; }
  double radius() const { return radius_; }
  double height() const { return height_; }

  /// Distance from transmitter j to receiver i, metres.
  double link_distance(int rx_index, int tx_index) const {
    return (rx_.row(rx_index) - tx_.row(tx_index)).norm();
  }

 private:
  Positions tx_;
  Positions rx_;
  double radius_;
  double height_;
};

/// Deterministic mode: tx i at angle 2*pi*i/n on a circle of radius/2, rx i on the same
/// circle rotated by pi/n. Uniform mode draws both ends uniformly over their disks.
Topology place_cylinder(int n, double radius, double height, Placement mode, std::uint64_t seed);

struct FailureMask {
  std::vector<bool> failed;

  bool operator[](std::size_t i) const { return failed[i]; }
  std::size_t size() const { return failed.size(); }
  int count() const;
};

/// Independent Bernoulli(epsilon) failure per node.
FailureMask sample_failures(double epsilon, int n, Rng& rng);

}  // namespace uhpnf
