#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavecollapse/config.hpp"
#include "wavecollapse/interferometer.hpp"
#include "wavecollapse/wavefunction.hpp"

namespace wavecollapse {

// One line of a simulated-vs-predicted comparison table.
struct Comparison {
  std::string name;
  double simulated = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  // false when the prediction's premise does not hold for this psi0; such
  // rows are reported but do not count as failures
  bool applicable = true;
  std::string detail;
};

// passed = |simulated - predicted| <= tolerance.
Comparison make_comparison(std::string name, double simulated, double predicted,
                           double tolerance, std::string detail = {});

// True when every applicable comparison passed.
bool all_passed(const std::vector<Comparison>& comparisons);

// The leading-order collapse results (width 1/(4Nk^2), sigma_p^2 = N (hbar k)^2)
// need psi0's own momentum spread to be small next to N (hbar k)^2.
inline constexpr double kLeadingOrderFraction = 0.1;
bool leading_order_applies(const Wavefunction& psi0, std::int64_t n, double k);

// Observables of one trajectory's final state. The local_* fields are the
// local momentum quantities of psi0 at x_est; local_defined is false when
// x_est sits on a node of psi0.
struct TrajectorySummary {
  std::uint64_t seed = 0;
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  double x_est = 0.0;
  double log_prob = 0.0;
  double sigma2_x = 0.0;
  double p_mean = 0.0;
  double p_var = 0.0;
  bool edge_leakage = false;
  bool local_defined = false;
  LocalMomentum local;
};

// x_est histogram with one bin per lattice value (n_b = 0..N), each of width
// 1 / (kN) and centred on (2 n_b - N) / (2kN).
struct XestHistogram {
  std::int64_t n = 0;
  double k = 1.0;
  std::vector<std::int64_t> counts;

  double bin_width() const { return 1.0 / (k * static_cast<double>(n)); }
  double center(std::int64_t n_b) const {
    return static_cast<double>(2 * n_b - n) / (2.0 * k * static_cast<double>(n));
  }
  std::int64_t total() const;
};

struct EnsembleStats {
  std::int64_t m_trajectories = 0;
  std::int64_t n_photons = 0;
  double k = 1.0;
  double hbar = 1.0;
  std::uint64_t master_seed = 0;

  std::vector<double> xest_samples;
  XestHistogram xest_histogram;
  // Exact probability of each n_b (binomial coefficient times the count
  // weight), indexed like the histogram.
  std::vector<double> predicted_nb_probability;
  std::vector<TrajectorySummary> trajectories;

  double mean_xest = 0.0;
  double var_xest = 0.0;             // sample variance (m - 1 denominator)
  double mean_p_final = 0.0;         // ensemble mean of <p>_final
  double var_p_final = 0.0;          // ensemble variance of <p>_final
  double mean_var_p_final = 0.0;     // mean of per-trajectory sigma_p^2
  double mean_sigma2_x_final = 0.0;  // mean of per-trajectory sigma_x^2

  std::vector<Comparison> comparisons;
};

struct EnsembleOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  // Fill the comparison table (needs the exact n_b distribution).
  bool compare = true;
};

// Runs m independent trajectories from psi0. Trajectory i uses the seed
// derive_seed(master_seed, i), so results do not depend on thread count or
// scheduling.
EnsembleStats run_ensemble(const Wavefunction& psi0, std::int64_t n, double k,
                           std::int64_t m, std::uint64_t master_seed,
                           const EnsembleOptions& options = {});
EnsembleStats run_ensemble(const SimConfig& config);

// Exact probability of observing n_b port-b counts:
// C(N, n_b) * integral |M_a|^{2 n_a} |M_b|^{2 n_b} |psi0|^2 dx.
double outcome_probability_binomial(const Wavefunction& psi0, std::int64_t n_b,
                                    std::int64_t n, double k);

// The same for every n_b = 0..N.
std::vector<double> outcome_distribution(const Wavefunction& psi0, std::int64_t n,
                                         const OperatorTable& ops);

// Large-N density of x_est: the Gaussian kernel sqrt(2N/pi) k e^{-2Nk^2 u^2}
// convolved with |psi0|^2. Per-bin probability is density / (kN).
// Throws ErrorCode::kSmallN for N < 100.
double predicted_xest_density(const Wavefunction& psi0, std::int64_t n, double k,
                              double x_est);

inline constexpr std::int64_t kMinMomentumTrajectories = 1000;
inline constexpr double kMomentumRoundingUlps = 16.0;
// Closed-form identities (Heisenberg product, de Broglie product) are
// checked to this many units in the last place.
inline constexpr double kAnalyticUlps = 2.0;

struct MomentumConservationCheck {
  // ensemble mean of <p>_final - N hbar k against <p_0>, tolerance 4 SE. The
  // SE has a rounding floor of kMomentumRoundingUlps * eps * N hbar k, since
  // states with a uniform phase gradient give every record the same <p>.
  Comparison ensemble;
  // max over trajectories of |<p>_final - N hbar k - local momentum of psi0 at
  // x_est|, tolerance 5% of hbar k sqrt(N)
  Comparison per_trajectory;
};

// Throws ErrorCode::kInsufficientStatistics for fewer than 1000 trajectories.
MomentumConservationCheck verify_momentum_conservation(const EnsembleStats& stats,
                                                       const Wavefunction& psi0,
                                                       std::int64_t n, double k);

struct MomentumVarianceCheck {
  Comparison leading;     // worst |sigma_p^2 / (N (hbar k)^2) - 1| <= 0.1
  Comparison heisenberg;  // sqrt(N (hbar k)^2) * sqrt(1/(4Nk^2)) = hbar / 2
  Comparison total;       // var<p> + mean sigma_p^2 - N(hbar k)^2 vs sigma_p0^2
  // Ensemble means of the two pieces of the local second moment at x_est.
  double gradient_term_mean = 0.0;
  double curvature_term_mean = 0.0;
};

MomentumVarianceCheck verify_momentum_variance(const EnsembleStats& stats,
                                               const Wavefunction& psi0,
                                               std::int64_t n, double k);

struct DeBroglieCheck {
  double wavelength = 0.0;  // 2 pi / (N k)
  double momentum = 0.0;    // N hbar k
  double product = 0.0;     // wavelength * momentum / h
};

DeBroglieCheck de_broglie_check(std::int64_t n, double k, double hbar = 1.0);

struct PhaseWavenumberFit {
  double fitted = 0.0;    // slope of the unwrapped phase of psi_N
  double expected = 0.0;  // N k
  double relative_error = 0.0;
};

PhaseWavenumberFit fit_final_wavenumber(const Wavefunction& final_state,
                                        std::int64_t n, double k);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  int bins = 0;
  double p_value = 1.0;
  double critical_value = 0.0;  // at the requested significance
};

// Pearson chi-square of observed counts against expected probabilities, with
// neighbouring bins pooled until each expects at least min_expected events.
ChiSquareResult chi_square_test(const std::vector<std::int64_t>& counts,
                                const std::vector<double>& probabilities,
                                double significance = 0.01, double min_expected = 5.0);

}  // namespace wavecollapse
