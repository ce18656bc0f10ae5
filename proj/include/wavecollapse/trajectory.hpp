#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavecollapse/interferometer.hpp"
#include "wavecollapse/rng.hpp"
#include "wavecollapse/wavefunction.hpp"

namespace wavecollapse {

// How run_trajectory advances the state between photons. Both kernels draw
// one uniform number per photon and pick port b when it falls below P_b, so
// for a given seed they produce the same outcome record.
enum class TrajectoryKernel {
  // kDensity when the grid satisfies the closed-form branch condition,
  // kStateVector otherwise.
  kAuto,
  // Applies M_a or M_b to the complex state and renormalizes after every
  // photon.
  kStateVector,
  // Applies |M_a|^2 or |M_b|^2 to the probability mass on the live support of
  // the state, renormalizing after every photon; the final state is rebuilt
  // with aggregate_operator, which is exact because the operators commute.
  kDensity,
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  double k = 1.0;
  std::vector<PhotonOutcome> outcomes;
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  double x_est = 0.0;
  Wavefunction final_state;
  std::vector<double> step_probabilities;
  std::vector<double> step_log_probabilities;
  double log_prob = 0.0;  // sum of step_log_probabilities
  // |n_a - n_b| > 10 sqrt(N): the record is far outside the tuned regime
  // where the shot-noise variance formula applies.
  bool tuning_violated = false;

  std::int64_t n() const noexcept { return n_a + n_b; }
  std::string outcome_string() const;
};

TrajectoryRecord run_trajectory(const Wavefunction& psi0, std::int64_t n, double k,
                                std::uint64_t seed,
                                TrajectoryKernel kernel = TrajectoryKernel::kAuto);
TrajectoryRecord run_trajectory(const Wavefunction& psi0, std::int64_t n,
                                const OperatorTable& ops, std::uint64_t seed,
                                TrajectoryKernel kernel = TrajectoryKernel::kAuto);

// Counts and log-probability of one measurement run, without per-step
// records. Used by the ensemble driver.
struct PhotonCounts {
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  double log_prob = 0.0;
};

// Density-kernel photon loop. When outcomes/step_probabilities are non-null
// they receive one entry per photon.
PhotonCounts count_photons(const Wavefunction& psi0, const OperatorTable& ops,
                           std::int64_t n, RandomStream& rng,
                           std::vector<PhotonOutcome>* outcomes = nullptr,
                           std::vector<double>* step_probabilities = nullptr);

// (n_b - n_a) / (2 k N). Throws ErrorCode::kCountMismatch unless
// n_a + n_b == N > 0.
double estimate_position(std::int64_t n_a, std::int64_t n_b, std::int64_t n, double k);

// Shot-noise variance of x_est, 1 / (4 N k^2).
double predicted_sigma2_xest(std::int64_t n, double k);

// Smallest increment of x_est, 1 / (k N).
double resolution(std::int64_t n, double k);

// The estimate a single photon would give on its own: -1/(2k) for port a,
// +1/(2k) for port b.
double one_shot_weak_value(PhotonOutcome outcome, double k);

struct SequenceProbability {
  double step_product = 0.0;      // product of conditional step probabilities
  double closed_form = 0.0;       // integral |M_a^{n_a} M_b^{n_b} psi0|^2 dx
  double log_step_product = 0.0;
  double log_closed_form = 0.0;
};

SequenceProbability sequence_probability(const Wavefunction& psi0,
                                         std::span<const PhotonOutcome> outcomes,
                                         double k);

// log of the closed-form probability of any single record with these counts.
double log_sequence_probability(const Wavefunction& psi0, std::int64_t n_a,
                                std::int64_t n_b, double k);

}  // namespace wavecollapse
