#include "wavecollapse/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavecollapse/errors.hpp"

namespace wavecollapse {

namespace {

// Support trimming: points whose mass falls below this fraction of the peak
// are dropped from the live window. The expected future posterior weight of
// a region equals its current weight, so dropping ~1e-22 of the mass cannot
// visibly change later step probabilities.
constexpr double kTrimFraction = 1e-22;
constexpr std::int64_t kTrimInterval = 64;

void require_photons(std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::kCountMismatch, "N must be at least 1");
}

void check_normalized(const Wavefunction& psi0) {
  const double n2 = norm2(psi0);
  if (std::abs(n2 - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "initial state must be normalized");
  }
}

bool tuning_violated(std::int64_t n_a, std::int64_t n_b) {
  const double n = static_cast<double>(n_a + n_b);
  return static_cast<double>(std::llabs(n_a - n_b)) > 10.0 * std::sqrt(n);
}

[[noreturn]] void internal_fault() {
  throw Error(ErrorCode::kZeroNorm,
              "sampled outcome has vanishing probability (internal fault)");
}

// Sums of u, u*w_a, u*w_b over [lo, hi) with four interleaved partial sums;
// the fixed association order keeps results reproducible.
struct MassSums {
  double total = 0.0;
  double a = 0.0;
  double b = 0.0;
};

MassSums rescale_and_sum(double* u, const double* wa, const double* wb,
                         const double* factor, double scale, std::size_t lo,
                         std::size_t hi) {
  double t[4] = {0, 0, 0, 0};
  double sa[4] = {0, 0, 0, 0};
  double sb[4] = {0, 0, 0, 0};
  std::size_t i = lo;
  for (; i + 4 <= hi; i += 4) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double v = factor ? u[i + j] * factor[i + j] * scale : u[i + j];
      u[i + j] = v;
      t[j] += v;
      sa[j] += v * wa[i + j];
      sb[j] += v * wb[i + j];
    }
  }
  for (std::size_t j = 0; i < hi; ++i, ++j) {
    const double v = factor ? u[i] * factor[i] * scale : u[i];
    u[i] = v;
    t[j] += v;
    sa[j] += v * wa[i];
    sb[j] += v * wb[i];
  }
  return {(t[0] + t[1]) + (t[2] + t[3]), (sa[0] + sa[1]) + (sa[2] + sa[3]),
          (sb[0] + sb[1]) + (sb[2] + sb[3])};
}

void trim(const std::vector<double>& u, std::size_t& lo, std::size_t& hi) {
  double peak = 0.0;
  for (std::size_t i = lo; i < hi; ++i) peak = std::max(peak, u[i]);
  const double cut = kTrimFraction * peak;
  while (lo + 1 < hi && u[lo] < cut) ++lo;
  while (hi - 1 > lo && u[hi - 1] < cut) --hi;
}

TrajectoryRecord finish_record(std::uint64_t seed, double k,
                               std::vector<PhotonOutcome> outcomes,
                               std::vector<double> step_probs, Wavefunction final_state) {
  std::int64_t n_b = 0;
  for (PhotonOutcome o : outcomes) n_b += (o == PhotonOutcome::kB);
  const auto n = static_cast<std::int64_t>(outcomes.size());
  const std::int64_t n_a = n - n_b;

  std::vector<double> logs(step_probs.size());
  double log_prob = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    logs[i] = std::log(step_probs[i]);
    log_prob += logs[i];
  }
  return TrajectoryRecord{
      .seed = seed,
      .k = k,
      .outcomes = std::move(outcomes),
      .n_a = n_a,
      .n_b = n_b,
      .x_est = estimate_position(n_a, n_b, n, k),
      .final_state = std::move(final_state),
      .step_probabilities = std::move(step_probs),
      .step_log_probabilities = std::move(logs),
      .log_prob = log_prob,
      .tuning_violated = tuning_violated(n_a, n_b),
  };
}

TrajectoryRecord run_state_vector(const Wavefunction& psi0, std::int64_t n,
                                  const OperatorTable& ops, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<PhotonOutcome> outcomes;
  std::vector<double> probs;
  outcomes.reserve(static_cast<std::size_t>(n));
  probs.reserve(static_cast<std::size_t>(n));

  Wavefunction psi = psi0;
  for (std::int64_t step = 0; step < n; ++step) {
    const PortProbabilities p = port_probabilities(psi, ops);
    const PhotonOutcome o = rng.uniform() < p.b ? PhotonOutcome::kB : PhotonOutcome::kA;
    OutcomeUpdate update = [&] {
      try {
        return apply_outcome(psi, o, ops);
      } catch (const Error&) {
        internal_fault();
      }
    }();
    outcomes.push_back(o);
    probs.push_back(update.probability);
    psi = std::move(update.state);
  }
  return finish_record(seed, ops.k(), std::move(outcomes), std::move(probs),
                       std::move(psi));
}

}  // namespace

std::string TrajectoryRecord::outcome_string() const {
  std::string s(outcomes.size(), 'a');
  for (std::size_t i = 0; i < outcomes.size(); ++i) s[i] = to_char(outcomes[i]);
  return s;
}

PhotonCounts count_photons(const Wavefunction& psi0, const OperatorTable& ops,
                           std::int64_t n, RandomStream& rng,
                           std::vector<PhotonOutcome>* outcomes,
                           std::vector<double>* step_probabilities) {
  require_photons(n);
  if (!(psi0.grid() == ops.grid())) {
    throw Error(ErrorCode::kInvalidArgument, "operator table built for another grid");
  }
  const Grid& g = psi0.grid();
  std::vector<double> u(psi0.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = g.weight(i) * std::norm(psi0[i]);

  const double* wa = ops.weight_a().data();
  const double* wb = ops.weight_b().data();
  std::size_t lo = 0;
  std::size_t hi = u.size();
  trim(u, lo, hi);

  MassSums sums = rescale_and_sum(u.data(), wa, wb, nullptr, 1.0, lo, hi);
  if (!(sums.total >= kNormFloor)) {
    throw Error(ErrorCode::kZeroNorm, "initial state has zero norm");
  }

  PhotonCounts counts;
  for (std::int64_t step = 0; step < n; ++step) {
    const double pb = sums.b / sums.total;
    const bool port_b = rng.uniform() < pb;
    const double p = port_b ? pb : sums.a / sums.total;
    if (!(p >= kNormFloor)) internal_fault();

    if (port_b) {
      ++counts.n_b;
    } else {
      ++counts.n_a;
    }
    counts.log_prob += std::log(p);
    if (outcomes) outcomes->push_back(port_b ? PhotonOutcome::kB : PhotonOutcome::kA);
    if (step_probabilities) step_probabilities->push_back(p);

    if (step + 1 == n) break;
    // Renormalizing by the previous total and the step probability keeps the
    // live mass at 1, mirroring the per-photon state update.
    const double scale = 1.0 / (p * sums.total);
    sums = rescale_and_sum(u.data(), wa, wb, port_b ? wb : wa, scale, lo, hi);
    if ((step + 1) % kTrimInterval == 0) trim(u, lo, hi);
  }
  return counts;
}

TrajectoryRecord run_trajectory(const Wavefunction& psi0, std::int64_t n, double k,
                                std::uint64_t seed, TrajectoryKernel kernel) {
  return run_trajectory(psi0, n, OperatorTable(psi0.grid(), k), seed, kernel);
}

TrajectoryRecord run_trajectory(const Wavefunction& psi0, std::int64_t n,
                                const OperatorTable& ops, std::uint64_t seed,
                                TrajectoryKernel kernel) {
  require_photons(n);
  check_normalized(psi0);
  if (kernel == TrajectoryKernel::kAuto) {
    kernel = ops.within_branch() ? TrajectoryKernel::kDensity
                                 : TrajectoryKernel::kStateVector;
  }
  if (kernel == TrajectoryKernel::kStateVector) {
    return run_state_vector(psi0, n, ops, seed);
  }

  RandomStream rng(seed);
  std::vector<PhotonOutcome> outcomes;
  std::vector<double> probs;
  outcomes.reserve(static_cast<std::size_t>(n));
  probs.reserve(static_cast<std::size_t>(n));
  const PhotonCounts counts = count_photons(psi0, ops, n, rng, &outcomes, &probs);
  Wavefunction final_state = aggregate_operator(psi0, counts.n_a, counts.n_b, ops);
  return finish_record(seed, ops.k(), std::move(outcomes), std::move(probs),
                       std::move(final_state));
}

double estimate_position(std::int64_t n_a, std::int64_t n_b, std::int64_t n, double k) {
  if (n <= 0 || n_a < 0 || n_b < 0 || n_a + n_b != n) {
    throw Error(ErrorCode::kCountMismatch, "need n_a + n_b == N > 0");
  }
  return static_cast<double>(n_b - n_a) / (2.0 * k * static_cast<double>(n));
}

double predicted_sigma2_xest(std::int64_t n, double k) {
  require_photons(n);
  return 1.0 / (4.0 * static_cast<double>(n) * k * k);
}

double resolution(std::int64_t n, double k) {
  require_photons(n);
  return 1.0 / (k * static_cast<double>(n));
}

double one_shot_weak_value(PhotonOutcome outcome, double k) {
  const double magnitude = 1.0 / (2.0 * k);
  return outcome == PhotonOutcome::kB ? magnitude : -magnitude;
}

SequenceProbability sequence_probability(const Wavefunction& psi0,
                                         std::span<const PhotonOutcome> outcomes,
                                         double k) {
  const OperatorTable ops(psi0.grid(), k);
  SequenceProbability out;

  std::int64_t n_b = 0;
  for (PhotonOutcome o : outcomes) n_b += (o == PhotonOutcome::kB);
  const auto n_a = static_cast<std::int64_t>(outcomes.size()) - n_b;

  double log_product = 0.0;
  Wavefunction psi = psi0;
  for (PhotonOutcome o : outcomes) {
    try {
      OutcomeUpdate update = apply_outcome(psi, o, ops);
      log_product += std::log(update.probability);
      psi = std::move(update.state);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroNorm) throw;
      log_product = -std::numeric_limits<double>::infinity();
      break;
    }
  }
  out.log_step_product = log_product;
  out.step_product = std::exp(log_product);
  out.log_closed_form = log_count_weight(psi0, n_a, n_b, ops) - std::log(norm2(psi0));
  out.closed_form = std::exp(out.log_closed_form);
  return out;
}

double log_sequence_probability(const Wavefunction& psi0, std::int64_t n_a,
                                std::int64_t n_b, double k) {
  return log_count_weight(psi0, n_a, n_b, OperatorTable(psi0.grid(), k)) -
         std::log(norm2(psi0));
}

}  // namespace wavecollapse
