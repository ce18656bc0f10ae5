#include "wavecollapse/acceptance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "wavecollapse/config.hpp"
#include "wavecollapse/errors.hpp"
#include "wavecollapse/interferometer.hpp"
#include "wavecollapse/io.hpp"
#include "wavecollapse/rng.hpp"
#include "wavecollapse/trajectory.hpp"

namespace wavecollapse {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Criterion-specific stream offsets so no two criteria share random numbers.
std::uint64_t stream(const AcceptanceOptions& o, std::uint64_t criterion) {
  return derive_seed(o.seed, 0x5eed0000ULL + criterion);
}

Comparison at_most(std::string name, double value, double limit, std::string detail) {
  Comparison c = make_comparison(std::move(name), value, 0.0, limit, std::move(detail));
  c.passed = value <= limit;
  return c;
}

Comparison at_least(std::string name, double value, double limit, std::string detail) {
  Comparison c = make_comparison(std::move(name), value, limit, 0.0, std::move(detail));
  c.passed = value >= limit;
  return c;
}

const Comparison& find(const std::vector<Comparison>& cs, std::string_view name) {
  for (const Comparison& c : cs) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "missing comparison " + std::string(name));
}

std::vector<PhotonOutcome> outcomes_for(std::int64_t n_a, std::int64_t n_b) {
  std::vector<PhotonOutcome> out(static_cast<std::size_t>(n_a), PhotonOutcome::kA);
  out.insert(out.end(), static_cast<std::size_t>(n_b), PhotonOutcome::kB);
  return out;
}

Wavefunction apply_sequence(const Wavefunction& psi0, std::span<const PhotonOutcome> seq,
                            const OperatorTable& ops) {
  Wavefunction psi = psi0;
  for (PhotonOutcome o : seq) psi = apply_outcome(psi, o, ops).state;
  return psi;
}

Wavefunction random_state(std::uint64_t seed) {
  return init_random_superposition(SimConfig{}.grid(), seed);
}

// 1. Final width of single default trajectories against 1/(4Nk^2).
CriterionResult collapse_width(const AcceptanceOptions& o) {
  CriterionResult r{1, "collapse width of single trajectories", {}, 0.0, 60.0};
  const SimConfig cfg;
  const Wavefunction psi0 = cfg.initial_state();
  const OperatorTable ops(psi0.grid(), cfg.k);
  const double target = predicted_sigma2_xest(cfg.n_photons, cfg.k);
  constexpr int kRuns = 100;
  int within = 0;
  double worst = 0.0;
  for (int i = 0; i < kRuns; ++i) {
    const TrajectoryRecord rec =
        run_trajectory(psi0, cfg.n_photons, ops, derive_seed(stream(o, 1), i));
    const double dev = std::abs(position_variance(rec.final_state) / target - 1.0);
    within += dev <= 0.1;
    worst = std::max(worst, dev);
  }
  r.checks.push_back(at_least("runs_within_10_percent", within, 95,
                              fmt::format("of {} runs; worst relative deviation {:.4g}",
                                          kRuns, worst)));
  return r;
}

// 2. Permuting a fixed record changes neither the final state nor its
// probability.
CriterionResult order_invariance(const AcceptanceOptions& o) {
  CriterionResult r{2, "order invariance of the outcome record", {}, 0.0, 0.0};
  constexpr int kN = 12;
  constexpr int kPermutations = 100;
  const Wavefunction psi0 = random_state(stream(o, 2));
  const OperatorTable ops(psi0.grid(), 1.0);
  RandomStream rng(derive_seed(stream(o, 2), 1));
  std::vector<PhotonOutcome> record(kN);
  for (auto& c : record) c = rng.uniform() < 0.5 ? PhotonOutcome::kA : PhotonOutcome::kB;

  std::vector<Wavefunction> finals;
  std::vector<double> probs;
  for (int p = 0; p < kPermutations; ++p) {
    // Fisher-Yates on the stream, so permutations are platform independent.
    for (std::size_t i = record.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
      std::swap(record[i], record[j]);
    }
    double prob = 1.0;
    Wavefunction psi = psi0;
    for (PhotonOutcome c : record) {
      OutcomeUpdate u = apply_outcome(psi, c, ops);
      prob *= u.probability;
      psi = std::move(u.state);
    }
    finals.push_back(std::move(psi));
    probs.push_back(prob);
  }
  double worst_l2 = 0.0;
  double worst_p = 0.0;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    for (std::size_t j = i + 1; j < finals.size(); ++j) {
      worst_l2 = std::max(worst_l2, l2_distance(finals[i], finals[j]));
      worst_p = std::max(worst_p, std::abs(probs[i] - probs[j]));
    }
  }
  r.checks.push_back(at_most("final_state_l2", worst_l2, 1e-10,
                             "max pairwise L2 distance over 100 permutations, N = 12"));
  r.checks.push_back(at_most("sequence_probability", worst_p, 1e-12,
                             "max pairwise difference of step-probability products"));
  return r;
}

// 3. Sum of logged step probabilities equals the log of the closed form.
CriterionResult telescoping(const AcceptanceOptions& o) {
  CriterionResult r{3, "telescoping of step probabilities", {}, 0.0, 0.0};
  constexpr std::int64_t kN = 1000;
  constexpr int kRecords = 25;
  const SimConfig cfg;
  const Wavefunction gaussian = cfg.initial_state();
  const Wavefunction random = random_state(stream(o, 3));
  const OperatorTable ops(gaussian.grid(), cfg.k);
  double worst = 0.0;
  int count = 0;
  for (const Wavefunction* psi0 : {&gaussian, &random}) {
    for (TrajectoryKernel kernel : {TrajectoryKernel::kDensity, TrajectoryKernel::kStateVector}) {
      for (int i = 0; i < kRecords; ++i) {
        const TrajectoryRecord rec =
            run_trajectory(*psi0, kN, ops, derive_seed(stream(o, 3), count), kernel);
        const double sum = std::accumulate(rec.step_log_probabilities.begin(),
                                           rec.step_log_probabilities.end(), 0.0);
        const double closed = log_sequence_probability(*psi0, rec.n_a, rec.n_b, cfg.k);
        worst = std::max(worst, std::abs(sum - closed));
        ++count;
      }
    }
  }
  r.checks.push_back(at_most("log_probability", worst, 1e-8,
                             fmt::format("max |sum log p_j - log closed form| over {} "
                                         "records of N = 1000, both kernels",
                                         count)));
  return r;
}

// 4. Probabilities of all records (N = 10) and of all counts (N = 100) sum to 1.
CriterionResult exhaustiveness(const AcceptanceOptions& o) {
  CriterionResult r{4, "exhaustiveness of outcome probabilities", {}, 0.0, 0.0};
  const Wavefunction psi0 = random_state(stream(o, 4));
  const OperatorTable ops(psi0.grid(), 1.0);

  constexpr int kN = 10;
  double total = 0.0;
  std::vector<PhotonOutcome> seq(kN);
  for (unsigned bits = 0; bits < (1u << kN); ++bits) {
    for (int j = 0; j < kN; ++j) {
      seq[j] = (bits >> j) & 1u ? PhotonOutcome::kB : PhotonOutcome::kA;
    }
    total += sequence_probability(psi0, seq, 1.0).step_product;
  }
  r.checks.push_back(make_comparison("sequence_sum", total, 1.0, 1e-9,
                                     "sum over all 1024 records, N = 10"));

  const std::vector<double> dist = outcome_distribution(psi0, 100, ops);
  const double binomial_total = std::accumulate(dist.begin(), dist.end(), 0.0);
  r.checks.push_back(make_comparison("binomial_sum", binomial_total, 1.0, 1e-9,
                                     "sum over n_b of the exact count distribution, N = 100"));
  return r;
}

// 5. Two-lobe collapse statistics.
CriterionResult born_rule(const AcceptanceOptions& o) {
  CriterionResult r{5, "Born rule for a two-lobe state", {}, 0.0, 600.0};
  SimConfig cfg = SimConfig::defaults_for(Psi0Family::kTwoLobe);
  cfg.lobe_weight = 0.7;
  cfg.trajectories = 10000;
  const Wavefunction psi0 = cfg.initial_state();
  EnsembleOptions opts;
  opts.threads = o.threads;
  const EnsembleStats stats =
      run_ensemble(psi0, cfg.n_photons, cfg.k, cfg.trajectories, stream(o, 5), opts);
  const double m = static_cast<double>(stats.m_trajectories);
  const Comparison& frac = find(stats.comparisons, "xest_positive_fraction");
  r.checks.push_back(make_comparison("positive_lobe_fraction", frac.simulated, 0.7,
                                     4.0 * std::sqrt(0.21 / m),
                                     "fraction with x_est > 0, 4 binomial standard errors"));
  r.checks.push_back(find(stats.comparisons, "xest_chi_square"));
  return r;
}

// 6. Large-N density against the exact count distribution.
CriterionResult stirling(const AcceptanceOptions&) {
  CriterionResult r{6, "large-N density against exact counts", {}, 0.0, 0.0};
  const SimConfig cfg;
  const Wavefunction psi0 = cfg.initial_state();
  const OperatorTable ops(psi0.grid(), cfg.k);
  const std::int64_t n = cfg.n_photons;
  const std::vector<double> exact = outcome_distribution(psi0, n, ops);
  // sigma of n_b from shot noise alone: sqrt(N) / 2
  const auto two_sigma = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  double worst = 0.0;
  for (std::int64_t nb = n / 2 - two_sigma; nb <= n / 2 + two_sigma; ++nb) {
    const double x = estimate_position(n - nb, nb, n, cfg.k);
    const double approx = predicted_xest_density(psi0, n, cfg.k, x) * resolution(n, cfg.k);
    worst = std::max(worst, std::abs(approx / exact[static_cast<std::size_t>(nb)] - 1.0));
  }
  r.checks.push_back(at_most("relative_deviation", worst, 0.02,
                             "max over |n_b - N/2| <= 2 (sqrt(N)/2), N = 10^4"));
  return r;
}

// 7. Ensemble momentum with a boosted Gaussian.
CriterionResult momentum_conservation(const AcceptanceOptions& o) {
  CriterionResult r{7, "ensemble momentum conservation", {}, 0.0, 0.0};
  SimConfig cfg;
  cfg.p0 = 2.0 * cfg.hbar * cfg.k;
  const Wavefunction psi0 = cfg.initial_state();
  EnsembleOptions opts;
  opts.threads = o.threads;
  opts.compare = false;
  const EnsembleStats stats =
      run_ensemble(psi0, cfg.n_photons, cfg.k, cfg.trajectories, stream(o, 7), opts);
  const MomentumConservationCheck mc =
      verify_momentum_conservation(stats, psi0, cfg.n_photons, cfg.k);
  Comparison c = mc.ensemble;
  c.predicted = cfg.p0;
  c.passed = std::abs(c.simulated - c.predicted) <= c.tolerance;
  c.detail = "ensemble mean of <p>_final - N hbar k vs 2 hbar k, " + c.detail.substr(c.detail.find("4 standard"));
  r.checks.push_back(c);
  r.checks.push_back(mc.per_trajectory);
  return r;
}

// 8. Momentum spread of the collapsed states.
CriterionResult momentum_variance(const AcceptanceOptions& o) {
  CriterionResult r{8, "momentum variance and Heisenberg product", {}, 0.0, 0.0};
  const SimConfig cfg;
  const Wavefunction psi0 = cfg.initial_state();
  EnsembleOptions opts;
  opts.threads = o.threads;
  opts.compare = false;
  const EnsembleStats stats =
      run_ensemble(psi0, cfg.n_photons, cfg.k, cfg.trajectories, stream(o, 8), opts);
  const MomentumVarianceCheck mv = verify_momentum_variance(stats, psi0, cfg.n_photons, cfg.k);
  r.checks.push_back(mv.leading);
  r.checks.push_back(mv.heisenberg);
  Comparison total = mv.total;
  total.predicted = cfg.hbar * cfg.hbar / (4.0 * cfg.sigma0 * cfg.sigma0);
  total.tolerance = 0.1 * total.predicted;
  total.passed = std::abs(total.simulated - total.predicted) <= total.tolerance;
  total.detail = "var<p>_final + mean sigma_p^2 - N (hbar k)^2 vs hbar^2 / (4 sigma0^2), 10%";
  r.checks.push_back(total);
  return r;
}

// 9. Carrier wavenumber of a collapsed state, and lambda p / h.
CriterionResult de_broglie(const AcceptanceOptions& o) {
  CriterionResult r{9, "de Broglie wavelength", {}, 0.0, 0.0};
  const SimConfig cfg;
  const Wavefunction psi0 = cfg.initial_state();
  const TrajectoryRecord rec = run_trajectory(psi0, cfg.n_photons, cfg.k, stream(o, 9));
  const PhaseWavenumberFit fit = fit_final_wavenumber(rec.final_state, cfg.n_photons, cfg.k);
  r.checks.push_back(at_most("phase_wavenumber", fit.relative_error, 0.01,
                             fmt::format("fitted {:.10g} vs N k = {:.10g}, relative error",
                                         fit.fitted, fit.expected)));
  double worst = 0.0;
  for (std::int64_t n : {std::int64_t{1}, std::int64_t{100}, cfg.n_photons}) {
    worst = std::max(worst, std::abs(de_broglie_check(n, cfg.k, cfg.hbar).product - 1.0));
  }
  r.checks.push_back(at_most("wavelength_momentum_product", worst, kAnalyticUlps * kEps,
                             "max |lambda p / h - 1| for N = 1, 100, 10^4, to 2 ulps"));
  return r;
}

// 10. Small-kx form against the exact product, and the exact product against
// sequential application.
CriterionResult approximation_consistency(const AcceptanceOptions& o) {
  CriterionResult r{10, "approximation consistency", {}, 0.0, 0.0};
  const SimConfig cfg;
  const Wavefunction psi0 = cfg.initial_state();
  const OperatorTable ops(psi0.grid(), cfg.k);
  const std::int64_t n = cfg.n_photons;
  // Records whose x_est lies within one psi0 width of the centre.
  const auto reach = static_cast<std::int64_t>(std::llround(cfg.sigma0 * cfg.k * n));
  double worst_approx = 0.0;
  for (std::int64_t d = -reach; d <= reach; d += reach / 20) {
    const std::int64_t nb = n / 2 + d;
    const double x = estimate_position(n - nb, nb, n, cfg.k);
    const Wavefunction exact = aggregate_operator(psi0, n - nb, nb, ops);
    const Wavefunction approx = gaussian_approx_final(psi0, n, cfg.k, x).state;
    worst_approx = std::max(worst_approx, l2_distance(exact, approx));
  }
  r.checks.push_back(at_most("gaussian_form_l2", worst_approx, 1e-3,
                             "max L2 distance for default psi0, N = 10^4, |x_est| <= sigma0"));

  const Wavefunction random = random_state(stream(o, 10));
  double worst_seq = 0.0;
  for (std::int64_t total = 1; total <= 20; ++total) {
    for (std::int64_t nb = 0; nb <= total; ++nb) {
      const std::vector<PhotonOutcome> seq = outcomes_for(total - nb, nb);
      const Wavefunction sequential = apply_sequence(random, seq, ops);
      const Wavefunction aggregate = aggregate_operator(random, total - nb, nb, ops);
      worst_seq = std::max(worst_seq, l2_distance(sequential, aggregate));
    }
  }
  r.checks.push_back(at_most("aggregate_vs_sequential_l2", worst_seq, 1e-10,
                             "max L2 distance over all (n_a, n_b) with N <= 20, random psi0"));
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  using Fn = CriterionResult (*)(const AcceptanceOptions&);
  static constexpr Fn kCriteria[kCriterionCount] = {
      collapse_width, order_invariance,      telescoping, exhaustiveness, born_rule,
      stirling,       momentum_conservation, momentum_variance, de_broglie,
      approximation_consistency};
  if (id < 1 || id > kCriterionCount) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("no acceptance criterion {}", id));
  }
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r = kCriteria[id - 1](options);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    out.push_back(run_criterion(id, options));
    if (options.on_result) options.on_result(out.back());
  }
  return out;
}

std::string summary_line(const CriterionResult& r) {
  std::string line = fmt::format("[{}] {:>2} {}:", r.passed() ? "PASS" : "FAIL", r.id, r.title);
  for (const Comparison& c : r.checks) {
    line += fmt::format(" {}={:.6g}", c.name, c.simulated);
    if (!c.passed) line += c.applicable ? "(fail)" : "(n/a)";
  }
  line += fmt::format(" ({:.1f} s", r.seconds);
  if (r.time_limit > 0.0) line += fmt::format(", limit {:.0f} s", r.time_limit);
  line += ")";
  return line;
}

std::string acceptance_json(const std::vector<CriterionResult>& results) {
  JsonWriter w;
  w.begin_object();
  w.key("elapsed_seconds").begin_object(true);
  for (const CriterionResult& r : results) w.field(std::to_string(r.id), r.seconds);
  w.end_object();
  const bool passed = std::all_of(results.begin(), results.end(),
                                  [](const CriterionResult& r) { return r.passed(); });
  w.field("passed", passed);
  w.key("failures").begin_array();
  for (const CriterionResult& r : results) {
    if (!r.within_time()) w.value(fmt::format("{}:runtime", r.id));
    for (const Comparison& c : r.checks) {
      if (!c.passed && c.applicable) w.value(fmt::format("{}:{}", r.id, c.name));
    }
  }
  w.end_array();
  w.key("criteria").begin_array();
  for (const CriterionResult& r : results) {
    w.begin_object()
        .field("id", r.id)
        .field("title", r.title)
        .field("passed", r.passed())
        .field("time_limit_seconds", r.time_limit)
        .field("within_time", r.within_time());
    w.key("checks").begin_array();
    for (const Comparison& c : r.checks) write_comparison(w, c);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

}  // namespace wavecollapse
