#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wavecollapse {

using cplx = std::complex<double>;

// Uniform 1-D grid, x_i = x_min + i * spacing, both end points included.
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 16;

  Grid(double x_min, double x_max, std::size_t n_points);

  // Grid over [-half_width, half_width].
  static Grid symmetric(double half_width, std::size_t n_points) {
    return Grid(-half_width, half_width, n_points);
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_points_; }
  double spacing() const noexcept { return spacing_; }
  double x(std::size_t i) const noexcept {
    return x_min_ + static_cast<double>(i) * spacing_;
  }
  double max_abs_x() const noexcept;
  bool is_symmetric() const noexcept { return x_min_ == -x_max_; }

  // Trapezoidal quadrature weight of point i.
  double weight(std::size_t i) const noexcept {
    return (i == 0 || i + 1 == n_points_) ? 0.5 * spacing_ : spacing_;
  }

  std::vector<double> points() const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ &&
           a.n_points_ == b.n_points_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_points_;
  double spacing_;
};

// Trapezoidal rule for samples f on the grid.
double integrate(const Grid& grid, std::span<const double> f);
cplx integrate(const Grid& grid, std::span<const cplx> f);

// Complex amplitudes on a grid. Immutable once constructed; every operation
// returns a new value.
class Wavefunction {
 public:
  Wavefunction(Grid grid, std::vector<cplx> amplitudes, double hbar = 1.0);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
  const cplx& operator[](std::size_t i) const noexcept { return amplitudes_[i]; }
  std::size_t size() const noexcept { return amplitudes_.size(); }
  double hbar() const noexcept { return hbar_; }

  // |psi_i|^2 for every grid point.
  std::vector<double> density() const;

  // psi(-x); the grid must be symmetric about zero.
  Wavefunction mirrored() const;

 private:
  Grid grid_;
  std::vector<cplx> amplitudes_;
  double hbar_;
};

// Underflow floor below which a state is treated as having zero norm.
inline constexpr double kNormFloor = 1e-300;

struct Normalized {
  Wavefunction state;
  double norm2;  // squared norm before normalization
};

double norm2(const Wavefunction& psi);

// Throws ErrorCode::kZeroNorm when the squared norm is below kNormFloor.
// A state whose squared norm already rounds to 1 is returned unchanged, which
// makes the operation exactly idempotent.
Normalized normalize(const Wavefunction& psi);

// sqrt(integral |a - b|^2 dx); grids must match.
double l2_distance(const Wavefunction& a, const Wavefunction& b);

// --- Initial-state families -------------------------------------------------

// Normalized exp(-(x-x0)^2 / (4 sigma0^2)) exp(i p0 x / hbar).
// Requires sigma0 > 3 * spacing and [x0 - 5 sigma0, x0 + 5 sigma0] on the grid.
Wavefunction init_gaussian(const Grid& grid, double x0, double sigma0,
                           double p0, double hbar = 1.0);

struct TwoLobeParams {
  double x0 = 0.03;           // lobes centred at -x0 and +x0
  double sigma = 0.005;       // width of each lobe
  double weight_plus = 0.7;   // probability carried by the +x0 lobe
  double p_plus = 0.0;        // momentum of the +x0 lobe
  double p_minus = 0.0;       // momentum of the -x0 lobe
};

// sqrt(w) g(x - x0) e^{i p_plus x} + sqrt(1 - w) g(x + x0) e^{i p_minus x},
// with g the normalized Gaussian amplitude of width sigma.
Wavefunction init_two_lobe(const Grid& grid, const TwoLobeParams& params,
                           double hbar = 1.0);

// Constant amplitude over the whole grid.
Wavefunction init_flat(const Grid& grid, double hbar = 1.0);

// Smooth random superposition of three Gaussians with random centres, widths,
// weights, phases and momenta, all well inside the grid. Deterministic in seed.
Wavefunction init_random_superposition(const Grid& grid, std::uint64_t seed,
                                       double hbar = 1.0);

// --- Position observables ---------------------------------------------------

double position_mean(const Wavefunction& psi);
double position_variance(const Wavefunction& psi);

// --- Derivatives and momentum observables -----------------------------------

enum class DerivativeScheme {
  // Fourth-order central differences (one-sided at the edges) applied after
  // removing the dominant plane-wave carrier, so states carrying large
  // momentum kicks are differentiated accurately.
  kFiniteDifference,
  // Discrete Fourier derivative; treats the grid as periodic. Used for
  // cross-checks on states that vanish at the edges.
  kSpectral,
};

struct Derivatives {
  std::vector<cplx> first;
  std::vector<cplx> second;
};

Derivatives derivatives(const Wavefunction& psi,
                        DerivativeScheme scheme = DerivativeScheme::kFiniteDifference);

// Dominant carrier wavenumber, arg(sum psi_{i+1} conj(psi_i)) / spacing.
double carrier_wavenumber(const Wavefunction& psi);

// Amplitude above which the boundary is considered to leak.
inline constexpr double kEdgeLeakageThreshold = 1e-8;

bool edge_leakage(const Wavefunction& psi,
                  double threshold = kEdgeLeakageThreshold);

struct MomentumMoments {
  double mean = 0.0;
  double variance = 0.0;
  bool edge_leakage = false;
};

MomentumMoments momentum_moments(
    const Wavefunction& psi,
    DerivativeScheme scheme = DerivativeScheme::kFiniteDifference);

double momentum_mean(const Wavefunction& psi,
                     DerivativeScheme scheme = DerivativeScheme::kFiniteDifference);
double momentum_variance(
    const Wavefunction& psi,
    DerivativeScheme scheme = DerivativeScheme::kFiniteDifference);

// |psi(x)|^2 below which local momentum quantities are undefined.
inline constexpr double kNodeThreshold = 1e-12;

struct LocalMomentum {
  // -i hbar (psi* psi' - psi psi'*) / (2 |psi|^2)
  double density = 0.0;
  // -hbar^2 (psi* psi'' + psi psi''* - 2 |psi'|^2) / (4 |psi|^2)
  double second_moment = 0.0;
  // The two pieces of second_moment:
  //   gradient_term  =  hbar^2 |psi'|^2 / (2 |psi|^2)
  //   curvature_term = -hbar^2 Re(psi* psi'') / (2 |psi|^2)
  double gradient_term = 0.0;
  double curvature_term = 0.0;
};

// Local momentum quantities of a fixed state, evaluated anywhere inside the
// grid by four-point Lagrange interpolation of psi, psi' and psi''.
class LocalMomentumField {
 public:
  explicit LocalMomentumField(const Wavefunction& psi);

  // Throws ErrorCode::kNodeSingularity where |psi(x)|^2 < kNodeThreshold and
  // ErrorCode::kInvalidArgument outside the grid.
  LocalMomentum at(double x) const;

 private:
  Grid grid_;
  double hbar_;
  std::vector<cplx> value_;
  std::vector<cplx> first_;
  std::vector<cplx> second_;
};

double local_momentum_density(const Wavefunction& psi, double x);
double local_momentum_second_moment(const Wavefunction& psi, double x);

// Weighted least-squares slope of the unwrapped phase of psi over the region
// where |psi|^2 exceeds rel_threshold times its maximum.
double fit_phase_wavenumber(const Wavefunction& psi, double rel_threshold = 1e-3);

}  // namespace wavecollapse
