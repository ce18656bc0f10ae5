#include "wavecollapse/ensemble.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <numbers>
#include <thread>

#include "wavecollapse/errors.hpp"
#include "wavecollapse/rng.hpp"
#include "wavecollapse/trajectory.hpp"

namespace wavecollapse {

namespace {

double log_binomial(std::int64_t n, std::int64_t r) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(r) + 1.0) -
         std::lgamma(static_cast<double>(n - r) + 1.0);
}

unsigned resolve_threads(unsigned requested, std::int64_t m) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::int64_t>(t, m));
}

TrajectorySummary summarize(const Wavefunction& psi0, const OperatorTable& ops,
                            const LocalMomentumField& local_field, std::int64_t n,
                            std::uint64_t seed) {
  TrajectorySummary s;
  s.seed = seed;
  std::optional<Wavefunction> final_state;
  if (ops.within_branch()) {
    RandomStream rng(seed);
    const PhotonCounts counts = count_photons(psi0, ops, n, rng);
    s.n_a = counts.n_a;
    s.n_b = counts.n_b;
    s.log_prob = counts.log_prob;
    final_state = aggregate_operator(psi0, s.n_a, s.n_b, ops);
  } else {
    TrajectoryRecord rec =
        run_trajectory(psi0, n, ops, seed, TrajectoryKernel::kStateVector);
    s.n_a = rec.n_a;
    s.n_b = rec.n_b;
    s.log_prob = rec.log_prob;
    final_state = std::move(rec.final_state);
  }
  s.x_est = estimate_position(s.n_a, s.n_b, n, ops.k());
  s.sigma2_x = position_variance(*final_state);
  const MomentumMoments mm = momentum_moments(*final_state);
  s.p_mean = mm.mean;
  s.p_var = mm.variance;
  s.edge_leakage = mm.edge_leakage;
  try {
    s.local = local_field.at(s.x_est);
    s.local_defined = true;
  } catch (const Error&) {
    s.local_defined = false;
  }
  return s;
}

void fill_comparisons(EnsembleStats& stats, const Wavefunction& psi0) {
  const std::int64_t n = stats.n_photons;
  const double k = stats.k;
  const auto m = static_cast<double>(stats.m_trajectories);
  const auto& prob = stats.predicted_nb_probability;
  const XestHistogram& h = stats.xest_histogram;

  double mean = 0.0;
  double positive = 0.0;
  for (std::int64_t nb = 0; nb <= n; ++nb) {
    mean += prob[nb] * h.center(nb);
    if (2 * nb > n) positive += prob[nb];
  }
  double var = 0.0;
  double mu4 = 0.0;
  for (std::int64_t nb = 0; nb <= n; ++nb) {
    const double d = h.center(nb) - mean;
    var += prob[nb] * d * d;
    mu4 += prob[nb] * d * d * d * d;
  }

  auto& out = stats.comparisons;
  out.push_back(make_comparison("xest_mean", stats.mean_xest, mean,
                                4.0 * std::sqrt(var / m),
                                "exact binomial mean, 4 standard errors"));
  if (stats.m_trajectories > 1) {
    out.push_back(make_comparison("xest_variance", stats.var_xest, var,
                                  4.0 * std::sqrt(std::max(0.0, mu4 - var * var) / m),
                                  "exact binomial variance, 4 standard errors"));
  }

  double observed_positive = 0.0;
  for (double x : stats.xest_samples) observed_positive += (x > 0.0);
  out.push_back(make_comparison(
      "xest_positive_fraction", observed_positive / m, positive,
      4.0 * std::sqrt(positive * (1.0 - positive) / m),
      "fraction of records with x_est > 0, 4 binomial standard errors"));

  const bool leading = leading_order_applies(psi0, n, k);
  const ChiSquareResult chi = chi_square_test(h.counts, prob, 0.01);
  if (chi.bins >= 2) {
    Comparison c;
    c.name = "xest_chi_square";
    c.simulated = chi.statistic;
    c.predicted = chi.dof;
    c.tolerance = chi.critical_value - chi.dof;
    c.passed = chi.statistic <= chi.critical_value;
    c.detail = "pooled bins " + std::to_string(chi.bins) + ", p-value " +
               std::to_string(chi.p_value) + ", 1% significance";
    out.push_back(std::move(c));
  }

  const double shot_noise = predicted_sigma2_xest(n, k);
  out.push_back(make_comparison("collapse_width_shot_noise", stats.mean_sigma2_x_final,
                                shot_noise, 0.1 * shot_noise,
                                "mean final position variance vs 1/(4Nk^2), 10%; "
                                "applies when psi0 is much wider than 1/(2 sqrt(N) k)"));
  out.back().applicable = leading;

  // Small-kx prediction of the same width, evaluated at each simulated x_est.
  double approx_width = 0.0;
  for (const TrajectorySummary& t : stats.trajectories) {
    approx_width += position_variance(gaussian_approx_final(psi0, n, k, t.x_est).state);
  }
  approx_width /= m;
  out.push_back(make_comparison("collapse_width_gaussian_form", stats.mean_sigma2_x_final,
                                approx_width, 0.1 * approx_width,
                                "mean final position variance vs the small-kx "
                                "closed form at the same x_est, 10%"));

  if (stats.m_trajectories >= kMinMomentumTrajectories) {
    const MomentumConservationCheck mc = verify_momentum_conservation(stats, psi0, n, k);
    out.push_back(mc.ensemble);
    out.push_back(mc.per_trajectory);
    const MomentumVarianceCheck mv = verify_momentum_variance(stats, psi0, n, k);
    out.push_back(mv.leading);
    out.back().applicable = leading;
    out.push_back(mv.heisenberg);
    out.push_back(mv.total);
  }
}

}  // namespace

Comparison make_comparison(std::string name, double simulated, double predicted,
                           double tolerance, std::string detail) {
  Comparison c;
  c.name = std::move(name);
  c.simulated = simulated;
  c.predicted = predicted;
  c.tolerance = tolerance;
  c.passed = std::abs(simulated - predicted) <= tolerance;
  c.detail = std::move(detail);
  return c;
}

bool all_passed(const std::vector<Comparison>& comparisons) {
  return std::all_of(comparisons.begin(), comparisons.end(),
                     [](const Comparison& c) { return c.passed || !c.applicable; });
}

bool leading_order_applies(const Wavefunction& psi0, std::int64_t n, double k) {
  const double kick = psi0.hbar() * k;
  return momentum_variance(psi0) <= kLeadingOrderFraction * static_cast<double>(n) * kick * kick;
}

std::int64_t XestHistogram::total() const {
  std::int64_t t = 0;
  for (std::int64_t c : counts) t += c;
  return t;
}

EnsembleStats run_ensemble(const Wavefunction& psi0, std::int64_t n, double k,
                           std::int64_t m, std::uint64_t master_seed,
                           const EnsembleOptions& options) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one trajectory");
  if (n < 1) throw Error(ErrorCode::kCountMismatch, "N must be at least 1");

  const OperatorTable ops(psi0.grid(), k);
  const LocalMomentumField local_field(psi0);

  EnsembleStats stats;
  stats.m_trajectories = m;
  stats.n_photons = n;
  stats.k = k;
  stats.hbar = psi0.hbar();
  stats.master_seed = master_seed;
  stats.trajectories.resize(static_cast<std::size_t>(m));

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::int64_t i = next++; i < m; i = next++) {
      try {
        stats.trajectories[static_cast<std::size_t>(i)] = summarize(
            psi0, ops, local_field, n, derive_seed(master_seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = m;
      }
    }
  };
  {
    const unsigned n_threads = resolve_threads(options.threads, m);
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  // Reductions run in trajectory order, independent of scheduling.
  stats.xest_histogram.n = n;
  stats.xest_histogram.k = k;
  stats.xest_histogram.counts.assign(static_cast<std::size_t>(n + 1), 0);
  stats.xest_samples.reserve(static_cast<std::size_t>(m));
  const auto md = static_cast<double>(m);
  double sum_x = 0.0, sum_p = 0.0, sum_pvar = 0.0, sum_sx = 0.0;
  for (const TrajectorySummary& t : stats.trajectories) {
    stats.xest_samples.push_back(t.x_est);
    ++stats.xest_histogram.counts[static_cast<std::size_t>(t.n_b)];
    sum_x += t.x_est;
    sum_p += t.p_mean;
    sum_pvar += t.p_var;
    sum_sx += t.sigma2_x;
  }
  stats.mean_xest = sum_x / md;
  stats.mean_p_final = sum_p / md;
  stats.mean_var_p_final = sum_pvar / md;
  stats.mean_sigma2_x_final = sum_sx / md;
  double ssx = 0.0, ssp = 0.0;
  for (const TrajectorySummary& t : stats.trajectories) {
    ssx += (t.x_est - stats.mean_xest) * (t.x_est - stats.mean_xest);
    ssp += (t.p_mean - stats.mean_p_final) * (t.p_mean - stats.mean_p_final);
  }
  stats.var_xest = m > 1 ? ssx / (md - 1.0) : 0.0;
  stats.var_p_final = ssp / md;

  if (options.compare) {
    stats.predicted_nb_probability = outcome_distribution(psi0, n, ops);
    fill_comparisons(stats, psi0);
  }
  return stats;
}

EnsembleStats run_ensemble(const SimConfig& config) {
  config.validate();
  EnsembleOptions options;
  options.threads = config.threads;
  return run_ensemble(config.initial_state(), config.n_photons, config.k,
                      config.trajectories, config.seed, options);
}

double outcome_probability_binomial(const Wavefunction& psi0, std::int64_t n_b,
                                    std::int64_t n, double k) {
  if (n < 1 || n_b < 0 || n_b > n) {
    throw Error(ErrorCode::kCountMismatch, "need 0 <= n_b <= N with N >= 1");
  }
  const OperatorTable ops(psi0.grid(), k);
  return std::exp(log_binomial(n, n_b) + log_count_weight(psi0, n - n_b, n_b, ops) -
                  std::log(norm2(psi0)));
}

std::vector<double> outcome_distribution(const Wavefunction& psi0, std::int64_t n,
                                         const OperatorTable& ops) {
  if (n < 1) throw Error(ErrorCode::kCountMismatch, "N must be at least 1");
  const double log_norm = std::log(norm2(psi0));
  std::vector<double> p(static_cast<std::size_t>(n + 1));
  for (std::int64_t nb = 0; nb <= n; ++nb) {
    p[static_cast<std::size_t>(nb)] = std::exp(
        log_binomial(n, nb) + log_count_weight(psi0, n - nb, nb, ops) - log_norm);
  }
  return p;
}

double predicted_xest_density(const Wavefunction& psi0, std::int64_t n, double k,
                              double x_est) {
  if (n < 100) {
    throw Error(ErrorCode::kSmallN, "the large-N density needs N >= 100");
  }
  const Grid& g = psi0.grid();
  const double nd = static_cast<double>(n);
  const double amplitude = std::sqrt(2.0 * nd / std::numbers::pi) * k;
  const double rate = 2.0 * nd * k * k;
  std::vector<double> f(psi0.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double u = g.x(i) - x_est;
    f[i] = amplitude * std::exp(-rate * u * u) * std::norm(psi0[i]);
  }
  return integrate(g, f) / norm2(psi0);
}

MomentumConservationCheck verify_momentum_conservation(const EnsembleStats& stats,
                                                       const Wavefunction& psi0,
                                                       std::int64_t n, double k) {
  if (stats.m_trajectories < kMinMomentumTrajectories) {
    throw Error(ErrorCode::kInsufficientStatistics,
                "momentum checks need at least 1000 trajectories");
  }
  const double hbar = psi0.hbar();
  const double kick = static_cast<double>(n) * hbar * k;
  const auto m = static_cast<double>(stats.trajectories.size());

  double sum = 0.0;
  for (const TrajectorySummary& t : stats.trajectories) sum += t.p_mean - kick;
  const double mean = sum / m;
  double ss = 0.0;
  for (const TrajectorySummary& t : stats.trajectories) {
    const double d = t.p_mean - kick - mean;
    ss += d * d;
  }
  const double rounding =
      kMomentumRoundingUlps * std::numeric_limits<double>::epsilon() * std::abs(kick);
  const double standard_error = std::hypot(std::sqrt(ss / (m - 1.0) / m), rounding);
  const double p0 = momentum_mean(psi0);

  MomentumConservationCheck out;
  out.ensemble = make_comparison("momentum_conservation", mean, p0, 4.0 * standard_error,
                                 "ensemble mean of <p>_final - N hbar k vs <p_0>, "
                                 "4 standard errors with a rounding floor");

  double worst = 0.0;
  std::int64_t used = 0;
  for (const TrajectorySummary& t : stats.trajectories) {
    if (!t.local_defined) continue;
    worst = std::max(worst, std::abs(t.p_mean - kick - t.local.density));
    ++used;
  }
  out.per_trajectory = make_comparison(
      "momentum_local_term", worst, 0.0, 0.05 * hbar * k * std::sqrt(static_cast<double>(n)),
      "max |<p>_final - N hbar k - local momentum of psi0 at x_est| over " +
          std::to_string(used) + " records, 5% of hbar k sqrt(N)");
  return out;
}

MomentumVarianceCheck verify_momentum_variance(const EnsembleStats& stats,
                                               const Wavefunction& psi0,
                                               std::int64_t n, double k) {
  if (stats.m_trajectories < kMinMomentumTrajectories) {
    throw Error(ErrorCode::kInsufficientStatistics,
                "momentum checks need at least 1000 trajectories");
  }
  const double hbar = psi0.hbar();
  const double leading = static_cast<double>(n) * (hbar * k) * (hbar * k);

  MomentumVarianceCheck out;
  double worst = 0.0;
  for (const TrajectorySummary& t : stats.trajectories) {
    worst = std::max(worst, std::abs(t.p_var / leading - 1.0));
  }
  out.leading = make_comparison("momentum_variance_leading", worst, 0.0, 0.1,
                                "max |sigma_p^2 / (N (hbar k)^2) - 1| over records");

  const double product = std::sqrt(leading * predicted_sigma2_xest(n, k));
  out.heisenberg =
      make_comparison("heisenberg_product", product, 0.5 * hbar,
                      kAnalyticUlps * std::numeric_limits<double>::epsilon() * 0.5 * hbar,
                      "sigma_p sigma_xest from the leading terms, to 2 ulps");

  const double total = stats.var_p_final + stats.mean_var_p_final - leading;
  const double sigma2_p0 = momentum_variance(psi0);
  out.total = make_comparison("momentum_variance_total", total, sigma2_p0,
                              0.1 * sigma2_p0,
                              "var<p>_final + mean sigma_p^2 - N (hbar k)^2 vs "
                              "sigma_p0^2, 10%");

  double grad = 0.0, curv = 0.0;
  std::int64_t used = 0;
  for (const TrajectorySummary& t : stats.trajectories) {
    if (!t.local_defined) continue;
    grad += t.local.gradient_term;
    curv += t.local.curvature_term;
    ++used;
  }
  if (used > 0) {
    out.gradient_term_mean = grad / static_cast<double>(used);
    out.curvature_term_mean = curv / static_cast<double>(used);
  }
  return out;
}

DeBroglieCheck de_broglie_check(std::int64_t n, double k, double hbar) {
  if (n < 1) throw Error(ErrorCode::kCountMismatch, "N must be at least 1");
  DeBroglieCheck out;
  const double nk = static_cast<double>(n) * k;
  out.wavelength = 2.0 * std::numbers::pi / nk;
  out.momentum = nk * hbar;
  out.product = out.wavelength * out.momentum / (2.0 * std::numbers::pi * hbar);
  return out;
}

PhaseWavenumberFit fit_final_wavenumber(const Wavefunction& final_state,
                                        std::int64_t n, double k) {
  PhaseWavenumberFit out;
  out.fitted = fit_phase_wavenumber(final_state);
  out.expected = static_cast<double>(n) * k;
  out.relative_error = std::abs(out.fitted - out.expected) / out.expected;
  return out;
}

ChiSquareResult chi_square_test(const std::vector<std::int64_t>& counts,
                                const std::vector<double>& probabilities,
                                double significance, double min_expected) {
  if (counts.size() != probabilities.size()) {
    throw Error(ErrorCode::kInvalidArgument, "counts and probabilities differ in length");
  }
  double m = 0.0;
  double p_total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    m += static_cast<double>(counts[i]);
    p_total += probabilities[i];
  }

  std::vector<double> observed;
  std::vector<double> expected;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    o += static_cast<double>(counts[i]);
    e += m * probabilities[i] / p_total;
    if (e >= min_expected) {
      observed.push_back(o);
      expected.push_back(e);
      o = 0.0;
      e = 0.0;
    }
  }
  if (!expected.empty()) {
    observed.back() += o;
    expected.back() += e;
  }

  ChiSquareResult r;
  r.bins = static_cast<int>(expected.size());
  if (r.bins < 2) return r;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
  }
  r.dof = r.bins - 1;
  const boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  r.critical_value = boost::math::quantile(boost::math::complement(dist, significance));
  return r;
}

}  // namespace wavecollapse
