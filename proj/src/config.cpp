#include "wavecollapse/config.hpp"

#include <cmath>
#include <string>

#include "wavecollapse/errors.hpp"
#include "wavecollapse/interferometer.hpp"

namespace wavecollapse {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, key + ": " + why);
}

}  // namespace

std::string_view to_string(Psi0Family family) {
  return family == Psi0Family::kGaussian ? "gaussian" : "two-lobe";
}

Psi0Family psi0_family_from_string(std::string_view name) {
  if (name == "gaussian") return Psi0Family::kGaussian;
  if (name == "two-lobe" || name == "two_lobe") return Psi0Family::kTwoLobe;
  invalid("psi0", "expected gaussian or two-lobe, got '" + std::string(name) + "'");
}

SimConfig SimConfig::defaults_for(Psi0Family family) {
  SimConfig c;
  c.psi0 = family;
  if (family == Psi0Family::kTwoLobe) {
    c.x0 = 0.03;
    c.sigma0 = 0.005;
  }
  return c;
}

Grid SimConfig::grid() const { return Grid(x_min, x_max, grid_points); }

Wavefunction SimConfig::initial_state() const {
  const Grid g = grid();
  if (psi0 == Psi0Family::kGaussian) return init_gaussian(g, x0, sigma0, p0, hbar);
  TwoLobeParams params;
  params.x0 = x0;
  params.sigma = sigma0;
  params.weight_plus = lobe_weight;
  params.p_plus = p0;
  params.p_minus = p0;
  return init_two_lobe(g, params, hbar);
}

void SimConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) invalid("k", "must be positive");
  if (n_photons < 1) invalid("n-photons", "must be at least 1");
  if (trajectories < 1) invalid("trajectories", "must be at least 1");
  if (grid_points < Grid::kMinPoints) {
    invalid("grid-points", "must be at least " + std::to_string(Grid::kMinPoints));
  }
  if (!(x_min < x_max)) invalid("x-max", "grid requires x_min < x_max");
  if (!(hbar > 0.0)) invalid("hbar", "must be positive");
  if (!(sigma0 > 0.0)) invalid("sigma0", "must be positive");
  if (!(lobe_weight >= 0.0 && lobe_weight <= 1.0)) {
    invalid("lobe-weight", "must lie in [0, 1]");
  }
  if (psi0 == Psi0Family::kTwoLobe && !(x0 > 0.0)) {
    invalid("x0", "two-lobe states need a positive lobe offset");
  }

  const Grid g = grid();
  if (!within_branch(g, k)) {
    throw Error(ErrorCode::kBranchViolation,
                "k * max|x| = " + std::to_string(k * g.max_abs_x()) +
                    " must stay below pi/4");
  }
  if (!(sigma0 > 3.0 * g.spacing())) {
    invalid("sigma0", "must exceed three grid spacings");
  }
  const double reach = std::abs(x0) + 5.0 * sigma0;
  if (x0 - 5.0 * sigma0 < x_min || x0 + 5.0 * sigma0 > x_max ||
      (psi0 == Psi0Family::kTwoLobe && -reach < x_min)) {
    invalid("x0", "initial state's 5 sigma0 support leaves the grid");
  }
  if (gaussian_checks && k * reach > small_kx_window * (1.0 + 1e-12)) {
    invalid("sigma0", "initial state support exceeds the small-kx window |kx| <= " +
                          std::to_string(small_kx_window));
  }
}

}  // namespace wavecollapse
