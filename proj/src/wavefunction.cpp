#include "wavecollapse/wavefunction.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include "wavecollapse/errors.hpp"
#include "wavecollapse/rng.hpp"

namespace wavecollapse {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_same_grid(const Wavefunction& a, const Wavefunction& b) {
  if (!(a.grid() == b.grid())) {
    throw Error(ErrorCode::kInvalidArgument, "wavefunctions live on different grids");
  }
}

// Fourth-order first and second derivatives of uniformly sampled data,
// one-sided stencils on the two outermost points at each end.
void finite_differences(std::span<const cplx> f, double h, std::vector<cplx>& d1,
                        std::vector<cplx>& d2) {
  const std::size_t n = f.size();
  d1.assign(n, cplx{});
  d2.assign(n, cplx{});
  const double c1 = 1.0 / (12.0 * h);
  const double c2 = 1.0 / (12.0 * h * h);

  for (std::size_t i = 2; i + 2 < n; ++i) {
    d1[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c1;
    d2[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * c2;
  }

  d1[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c1;
  d1[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c1;
  d2[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] -
           10.0 * f[5]) * c2;
  d2[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * c2;

  const std::size_t m = n - 1;
  d1[m] = -(-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] -
            3.0 * f[m - 4]) * c1;
  d1[m - 1] = -(-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] +
                f[m - 4]) * c1;
  d2[m] = (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3] +
           61.0 * f[m - 4] - 10.0 * f[m - 5]) * c2;
  d2[m - 1] = (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3] -
               6.0 * f[m - 4] + f[m - 5]) * c2;
}

// FFTW's planner is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void spectral_derivatives(std::span<const cplx> f, double h, std::vector<cplx>& d1,
                          std::vector<cplx>& d2) {
  const int n = static_cast<int>(f.size());
  std::vector<cplx> spectrum(f.size());
  std::vector<cplx> work(f.begin(), f.end());
  d1.assign(f.size(), cplx{});
  d2.assign(f.size(), cplx{});

  auto as_fftw = [](std::vector<cplx>& v) {
    return reinterpret_cast<fftw_complex*>(v.data());
  };

  fftw_plan forward;
  fftw_plan backward1;
  fftw_plan backward2;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_1d(n, as_fftw(work), as_fftw(spectrum), FFTW_FORWARD,
                               FFTW_ESTIMATE);
    backward1 = fftw_plan_dft_1d(n, as_fftw(work), as_fftw(d1), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
    backward2 = fftw_plan_dft_1d(n, as_fftw(work), as_fftw(d2), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  }
  fftw_execute(forward);

  const double length = static_cast<double>(n) * h;
  auto wavenumber = [&](int j) {
    const int shifted = (2 * j < n) ? j : j - n;
    return 2.0 * std::numbers::pi * shifted / length;
  };

  for (int j = 0; j < n; ++j) {
    const double kj = wavenumber(j);
    const bool nyquist = (n % 2 == 0) && (2 * j == n);
    work[j] = nyquist ? cplx{} : kI * kj * spectrum[j] / static_cast<double>(n);
  }
  fftw_execute(backward1);
  for (int j = 0; j < n; ++j) {
    const double kj = wavenumber(j);
    work[j] = -kj * kj * spectrum[j] / static_cast<double>(n);
  }
  fftw_execute(backward2);

  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(forward);
  fftw_destroy_plan(backward1);
  fftw_destroy_plan(backward2);
}

// Lagrange weights for the four nodes t = -1, 0, 1, 2 evaluated at t.
std::array<double, 4> lagrange4(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace

// --- Grid -------------------------------------------------------------------

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_points_(n_points), spacing_(0.0) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw Error(ErrorCode::kInvalidGrid, "grid requires finite x_min < x_max");
  }
  if (n_points < kMinPoints) {
    throw Error(ErrorCode::kInvalidGrid,
                "grid requires at least " + std::to_string(kMinPoints) + " points");
  }
  spacing_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

double Grid::max_abs_x() const noexcept {
  return std::max(std::abs(x_min_), std::abs(x(n_points_ - 1)));
}

std::vector<double> Grid::points() const {
  std::vector<double> xs(n_points_);
  for (std::size_t i = 0; i < n_points_; ++i) xs[i] = x(i);
  return xs;
}

double integrate(const Grid& grid, std::span<const double> f) {
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  sum += 0.5 * (f.front() + f.back());
  return sum * grid.spacing();
}

cplx integrate(const Grid& grid, std::span<const cplx> f) {
  cplx sum{};
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  sum += 0.5 * (f.front() + f.back());
  return sum * grid.spacing();
}

// --- Wavefunction -----------------------------------------------------------

Wavefunction::Wavefunction(Grid grid, std::vector<cplx> amplitudes, double hbar)
    : grid_(grid), amplitudes_(std::move(amplitudes)), hbar_(hbar) {
  if (amplitudes_.size() != grid_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "amplitude count does not match the grid size");
  }
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
    throw Error(ErrorCode::kInvalidArgument, "hbar must be positive and finite");
  }
  for (const cplx& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite amplitude");
    }
  }
}

std::vector<double> Wavefunction::density() const {
  std::vector<double> rho(amplitudes_.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(amplitudes_[i]);
  return rho;
}

Wavefunction Wavefunction::mirrored() const {
  if (!grid_.is_symmetric()) {
    throw Error(ErrorCode::kInvalidArgument, "mirroring needs a grid symmetric about 0");
  }
  std::vector<cplx> reversed(amplitudes_.rbegin(), amplitudes_.rend());
  return Wavefunction(grid_, std::move(reversed), hbar_);
}

double norm2(const Wavefunction& psi) {
  return integrate(psi.grid(), psi.density());
}

Normalized normalize(const Wavefunction& psi) {
  const double n2 = norm2(psi);
  if (!(n2 >= kNormFloor)) {
    throw Error(ErrorCode::kZeroNorm, "squared norm " + std::to_string(n2) +
                                          " is below the underflow floor");
  }
  // Rescaling a normalized state perturbs its computed norm by at most the
  // quadrature rounding bound, so such states are returned as they are.
  const double rounding = 2.0 * static_cast<double>(psi.size() + 2) *
                          std::numeric_limits<double>::epsilon();
  if (std::abs(n2 - 1.0) <= rounding) {
    return {psi, n2};
  }
  const double scale = 1.0 / std::sqrt(n2);
  std::vector<cplx> amps(psi.amplitudes().begin(), psi.amplitudes().end());
  for (cplx& a : amps) a *= scale;
  return {Wavefunction(psi.grid(), std::move(amps), psi.hbar()), n2};
}

double l2_distance(const Wavefunction& a, const Wavefunction& b) {
  require_same_grid(a, b);
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::norm(a[i] - b[i]);
  return std::sqrt(integrate(a.grid(), diff));
}

// --- Initial states ---------------------------------------------------------

Wavefunction init_gaussian(const Grid& grid, double x0, double sigma0, double p0,
                           double hbar) {
  if (!(sigma0 > 3.0 * grid.spacing())) {
    throw Error(ErrorCode::kGridTooCoarse,
                "sigma0 must exceed three grid spacings (" +
                    std::to_string(3.0 * grid.spacing()) + ")");
  }
  if (x0 - 5.0 * sigma0 < grid.x_min() || x0 + 5.0 * sigma0 > grid.x_max()) {
    throw Error(ErrorCode::kSupportClipped,
                "the 5 sigma0 window around x0 leaves the grid");
  }
  std::vector<cplx> amps(grid.size());
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double x = grid.x(i);
    const double u = x - x0;
    amps[i] = std::exp(-u * u / (4.0 * sigma0 * sigma0)) * std::polar(1.0, p0 * x / hbar);
  }
  return normalize(Wavefunction(grid, std::move(amps), hbar)).state;
}

Wavefunction init_two_lobe(const Grid& grid, const TwoLobeParams& p, double hbar) {
  if (!(p.weight_plus >= 0.0 && p.weight_plus <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lobe weight must lie in [0, 1]");
  }
  const Wavefunction plus = init_gaussian(grid, p.x0, p.sigma, p.p_plus, hbar);
  const Wavefunction minus = init_gaussian(grid, -p.x0, p.sigma, p.p_minus, hbar);
  const double a = std::sqrt(p.weight_plus);
  const double b = std::sqrt(1.0 - p.weight_plus);
  std::vector<cplx> amps(grid.size());
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = a * plus[i] + b * minus[i];
  return normalize(Wavefunction(grid, std::move(amps), hbar)).state;
}

Wavefunction init_flat(const Grid& grid, double hbar) {
  std::vector<cplx> amps(grid.size(), cplx{1.0, 0.0});
  return normalize(Wavefunction(grid, std::move(amps), hbar)).state;
}

Wavefunction init_random_superposition(const Grid& grid, std::uint64_t seed,
                                       double hbar) {
  RandomStream rng(seed);
  const double length = grid.x_max() - grid.x_min();
  const double lo = grid.x_min() + 0.25 * length;
  const double hi = grid.x_max() - 0.25 * length;
  const double sigma_min = std::max(6.0 * grid.spacing(), 0.01 * length);
  const double sigma_max = std::max(sigma_min, 0.025 * length);

  std::vector<cplx> amps(grid.size(), cplx{});
  for (int term = 0; term < 3; ++term) {
    const double centre = lo + (hi - lo) * rng.uniform();
    const double sigma = sigma_min + (sigma_max - sigma_min) * rng.uniform();
    const double weight = 0.2 + 0.8 * rng.uniform();
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    const double momentum = hbar * (2.0 * rng.uniform() - 1.0) / sigma;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const double x = grid.x(i);
      const double u = (x - centre) / sigma;
      amps[i] += weight * std::exp(-0.25 * u * u) *
                 std::polar(1.0, phase + momentum * (x - centre) / hbar);
    }
  }
  return normalize(Wavefunction(grid, std::move(amps), hbar)).state;
}

// --- Position ---------------------------------------------------------------

double position_mean(const Wavefunction& psi) {
  const Grid& g = psi.grid();
  const std::vector<double> rho = psi.density();
  std::vector<double> xrho(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) xrho[i] = g.x(i) * rho[i];
  return integrate(g, xrho) / integrate(g, rho);
}

double position_variance(const Wavefunction& psi) {
  const Grid& g = psi.grid();
  const std::vector<double> rho = psi.density();
  const double mean = position_mean(psi);
  std::vector<double> f(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double u = g.x(i) - mean;
    f[i] = u * u * rho[i];
  }
  return std::max(0.0, integrate(g, f) / integrate(g, rho));
}

// --- Momentum ---------------------------------------------------------------

double carrier_wavenumber(const Wavefunction& psi) {
  cplx lag{};
  for (std::size_t i = 0; i + 1 < psi.size(); ++i) lag += psi[i + 1] * std::conj(psi[i]);
  if (lag == cplx{}) return 0.0;
  return std::arg(lag) / psi.grid().spacing();
}

namespace {

// psi = e^{i q x} phi; returns phi together with its derivatives.
struct Demodulated {
  double q;
  std::vector<cplx> phi;
  std::vector<cplx> d1;
  std::vector<cplx> d2;
};

Demodulated demodulate(const Wavefunction& psi) {
  Demodulated out;
  out.q = carrier_wavenumber(psi);
  const Grid& g = psi.grid();
  out.phi.resize(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    out.phi[i] = psi[i] * std::polar(1.0, -out.q * g.x(i));
  }
  finite_differences(out.phi, g.spacing(), out.d1, out.d2);
  return out;
}

}  // namespace

Derivatives derivatives(const Wavefunction& psi, DerivativeScheme scheme) {
  Derivatives d;
  if (scheme == DerivativeScheme::kSpectral) {
    spectral_derivatives(psi.amplitudes(), psi.grid().spacing(), d.first, d.second);
    return d;
  }
  const Demodulated dm = demodulate(psi);
  const Grid& g = psi.grid();
  const double q = dm.q;
  d.first.resize(psi.size());
  d.second.resize(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const cplx carrier = std::polar(1.0, q * g.x(i));
    d.first[i] = carrier * (dm.d1[i] + kI * q * dm.phi[i]);
    d.second[i] = carrier * (dm.d2[i] + 2.0 * kI * q * dm.d1[i] - q * q * dm.phi[i]);
  }
  return d;
}

bool edge_leakage(const Wavefunction& psi, double threshold) {
  return std::abs(psi[0]) > threshold || std::abs(psi[psi.size() - 1]) > threshold;
}

MomentumMoments momentum_moments(const Wavefunction& psi, DerivativeScheme scheme) {
  const Grid& g = psi.grid();
  const double hbar = psi.hbar();
  const double n2 = norm2(psi);
  MomentumMoments m;
  m.edge_leakage = edge_leakage(psi);

  // Moments are accumulated relative to a carrier q so that large momentum
  // kicks do not cancel catastrophically in <p^2> - <p>^2.
  double q = 0.0;
  std::vector<cplx> phi;
  std::vector<cplx> d1;
  if (scheme == DerivativeScheme::kSpectral) {
    phi.assign(psi.amplitudes().begin(), psi.amplitudes().end());
    std::vector<cplx> d2;
    spectral_derivatives(phi, g.spacing(), d1, d2);
  } else {
    Demodulated dm = demodulate(psi);
    q = dm.q;
    phi = std::move(dm.phi);
    d1 = std::move(dm.d1);
  }

  std::vector<cplx> overlap(phi.size());
  std::vector<double> slope2(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    overlap[i] = std::conj(phi[i]) * d1[i];
    slope2[i] = std::norm(d1[i]);
  }
  const double residual_mean = hbar * integrate(g, overlap).imag() / n2;
  const double residual_second = hbar * hbar * integrate(g, slope2) / n2;
  m.mean = hbar * q + residual_mean;
  m.variance = std::max(0.0, residual_second - residual_mean * residual_mean);
  return m;
}

double momentum_mean(const Wavefunction& psi, DerivativeScheme scheme) {
  return momentum_moments(psi, scheme).mean;
}

double momentum_variance(const Wavefunction& psi, DerivativeScheme scheme) {
  return momentum_moments(psi, scheme).variance;
}

// --- Local momentum ---------------------------------------------------------

LocalMomentumField::LocalMomentumField(const Wavefunction& psi)
    : grid_(psi.grid()),
      hbar_(psi.hbar()),
      value_(psi.amplitudes().begin(), psi.amplitudes().end()) {
  Derivatives d = derivatives(psi, DerivativeScheme::kFiniteDifference);
  first_ = std::move(d.first);
  second_ = std::move(d.second);
}

LocalMomentum LocalMomentumField::at(double x) const {
  if (!(x >= grid_.x_min() && x <= grid_.x_max())) {
    throw Error(ErrorCode::kInvalidArgument, "x lies outside the grid");
  }
  const double s = (x - grid_.x_min()) / grid_.spacing();
  const auto last_start = static_cast<std::ptrdiff_t>(grid_.size()) - 4;
  std::ptrdiff_t start = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  start = std::clamp<std::ptrdiff_t>(start, 0, last_start);
  const auto w = lagrange4(s - static_cast<double>(start) - 1.0);

  cplx f{}, f1{}, f2{};
  for (std::size_t j = 0; j < 4; ++j) {
    const auto idx = static_cast<std::size_t>(start) + j;
    f += w[j] * value_[idx];
    f1 += w[j] * first_[idx];
    f2 += w[j] * second_[idx];
  }

  const double rho = std::norm(f);
  if (rho < kNodeThreshold) {
    throw Error(ErrorCode::kNodeSingularity,
                "|psi|^2 = " + std::to_string(rho) + " at x = " + std::to_string(x));
  }
  LocalMomentum out;
  const double h2 = hbar_ * hbar_;
  out.density = hbar_ * (std::conj(f) * f1).imag() / rho;
  out.gradient_term = h2 * std::norm(f1) / (2.0 * rho);
  out.curvature_term = -h2 * (std::conj(f) * f2).real() / (2.0 * rho);
  out.second_moment = out.gradient_term + out.curvature_term;
  return out;
}

double local_momentum_density(const Wavefunction& psi, double x) {
  return LocalMomentumField(psi).at(x).density;
}

double local_momentum_second_moment(const Wavefunction& psi, double x) {
  return LocalMomentumField(psi).at(x).second_moment;
}

// --- Phase fit --------------------------------------------------------------

double fit_phase_wavenumber(const Wavefunction& psi, double rel_threshold) {
  const std::vector<double> rho = psi.density();
  const auto peak = static_cast<std::size_t>(
      std::max_element(rho.begin(), rho.end()) - rho.begin());
  const double cut = rel_threshold * rho[peak];
  std::size_t lo = peak;
  std::size_t hi = peak;
  while (lo > 0 && rho[lo - 1] >= cut) --lo;
  while (hi + 1 < rho.size() && rho[hi + 1] >= cut) ++hi;
  if (hi - lo < 2) {
    throw Error(ErrorCode::kInvalidArgument, "too few points to fit a phase slope");
  }

  const Grid& g = psi.grid();
  double phase = std::arg(psi[lo]);
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i > lo) phase += std::arg(psi[i] * std::conj(psi[i - 1]));
    const double x = g.x(i);
    const double w = rho[i];
    sw += w;
    sx += w * x;
    sy += w * phase;
    sxx += w * x * x;
    sxy += w * x * phase;
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  return (sxy / sw - xbar * ybar) / (sxx / sw - xbar * xbar);
}

}  // namespace wavecollapse
