#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include "wavecollapse/wavefunction.hpp"

namespace wavecollapse {

enum class Psi0Family { kGaussian, kTwoLobe };

std::string_view to_string(Psi0Family family);
Psi0Family psi0_family_from_string(std::string_view name);

// Every physical and numerical parameter of a run. Defaults reproduce the
// reference setup: k = 1, N = 10^4, 4097 points over [-pi/8, pi/8], a
// Gaussian initial state with sigma0 = 0.02, 10^3 trajectories, seed 42.
struct SimConfig {
  double k = 1.0;
  std::int64_t n_photons = 10000;
  std::size_t grid_points = 4097;
  double x_min = -std::numbers::pi / 8.0;
  double x_max = std::numbers::pi / 8.0;

  Psi0Family psi0 = Psi0Family::kGaussian;
  double x0 = 0.0;       // Gaussian centre, or lobe offset for two-lobe states
  double sigma0 = 0.02;  // Gaussian width, or width of each lobe
  double p0 = 0.0;       // momentum (both lobes for two-lobe states)
  double lobe_weight = 0.7;  // probability in the +x0 lobe

  std::int64_t trajectories = 1000;
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0 = hardware concurrency
  double hbar = 1.0;

  // Small-kx checks require the initial state inside |kx| <= small_kx_window.
  bool gaussian_checks = true;
  double small_kx_window = 0.1;

  std::string out_dir = ".";

  // Family defaults for x0 / sigma0 (two-lobe: 0.03 / 0.005).
  static SimConfig defaults_for(Psi0Family family);

  Grid grid() const;
  Wavefunction initial_state() const;

  // Throws Error(kInvalidConfig) naming the violated constraint, or
  // Error(kBranchViolation) when k * max|x| >= pi/4.
  void validate() const;
};

}  // namespace wavecollapse
