#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "wavecollapse/ensemble.hpp"
#include "wavecollapse/interferometer.hpp"
#include "wavecollapse/rng.hpp"
#include "wavecollapse/trajectory.hpp"

using namespace wavecollapse;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCases = 40;

// Generators draw from one stream per property, so a failure reproduces from
// the property name and case index alone.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng_.next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::uint64_t seed() { return rng_.next(); }

  double k() { return uniform(0.5, 2.0); }

  // Grid inside the branch |kx| < pi/4 for wavenumber k.
  Grid grid(double k, std::size_t points = 1025) {
    const double half = uniform(0.6, 0.95) * kPi / (4.0 * k);
    return Grid(-half, half, points);
  }

  Wavefunction state(const Grid& g) {
    const double half = g.x_max();
    if (integer(0, 1) == 0) return init_random_superposition(g, seed());
    const double sigma = uniform(0.03, 0.12) * half;
    const double x0 = uniform(-0.3, 0.3) * half;
    const double p0 = uniform(-20.0, 20.0);
    return init_gaussian(g, x0, sigma, p0);
  }

  std::vector<PhotonOutcome> record(std::int64_t n) {
    std::vector<PhotonOutcome> out(static_cast<std::size_t>(n));
    for (auto& o : out) o = integer(0, 1) ? PhotonOutcome::kB : PhotonOutcome::kA;
    return out;
  }

  void shuffle(std::vector<PhotonOutcome>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(i) - 1))]);
    }
  }

 private:
  RandomStream rng_;
};

Wavefunction apply_sequence(Wavefunction psi, const std::vector<PhotonOutcome>& rec,
                            const OperatorTable& ops) {
  for (PhotonOutcome o : rec) psi = apply_outcome(psi, o, ops).state;
  return psi;
}

}  // namespace

TEST(Property, PortWeightsComplete) {
  Gen gen(1);
  for (int i = 0; i < 10000; ++i) {
    const double k = gen.k();
    const double x = gen.uniform(-kPi / 4, kPi / 4) / k;
    ASSERT_NEAR(port_a_weight(x, k) + port_b_weight(x, k), 1.0, 1e-15) << x;
    ASSERT_NEAR(std::norm(m_a(x, k)) + std::norm(m_b(x, k)), 1.0, 4e-16) << x;
    ASSERT_GE(port_a_weight(x, k), 0.0);
    ASSERT_GE(port_b_weight(x, k), 0.0);
  }
}

TEST(Property, PortProbabilitiesSumToOne) {
  Gen gen(2);
  for (int c = 0; c < kCases; ++c) {
    const double k = gen.k();
    const Wavefunction psi = gen.state(gen.grid(k));
    const PortProbabilities p = port_probabilities(psi, k);
    ASSERT_NEAR(p.a + p.b, 1.0, 1e-12) << c;
  }
}

TEST(Property, NormalizeIdempotent) {
  Gen gen(3);
  for (int c = 0; c < kCases; ++c) {
    const Grid g = gen.grid(1.0);
    const Wavefunction psi = gen.state(g);
    std::vector<cplx> scaled(psi.amplitudes().begin(), psi.amplitudes().end());
    const double s = gen.uniform(0.01, 100.0);
    for (cplx& a : scaled) a *= s;
    const Wavefunction once = normalize(Wavefunction(g, scaled)).state;
    const Wavefunction twice = normalize(once).state;
    ASSERT_NEAR(norm2(once), 1.0, 1e-14);
    for (std::size_t i = 0; i < once.size(); ++i) ASSERT_EQ(once[i], twice[i]) << c;
  }
}

TEST(Property, VariancesNonNegative) {
  Gen gen(4);
  for (int c = 0; c < kCases; ++c) {
    const double k = gen.k();
    const Grid g = gen.grid(k);
    Wavefunction psi = gen.state(g);
    ASSERT_GE(position_variance(psi), 0.0);
    ASSERT_GE(momentum_variance(psi), 0.0);
    const std::int64_t n_a = gen.integer(0, 3000);
    const std::int64_t n_b = gen.integer(0, 3000);
    psi = aggregate_operator(psi, n_a, n_b, k);
    ASSERT_GE(position_variance(psi), 0.0);
    ASSERT_GE(momentum_variance(psi), 0.0);
  }
}

TEST(Property, DerivativeSchemesAgree) {
  Gen gen(5);
  for (int c = 0; c < kCases; ++c) {
    const Grid g = gen.grid(1.0, 4097);
    const Wavefunction psi = gen.state(g);
    const double fd = momentum_mean(psi);
    const double spectral = momentum_mean(psi, DerivativeScheme::kSpectral);
    ASSERT_NEAR(fd, spectral, 1e-6) << c;
  }
}

TEST(Property, OrderInvariance) {
  Gen gen(6);
  for (int c = 0; c < kCases; ++c) {
    const double k = gen.k();
    const Grid g = gen.grid(k, 513);
    const OperatorTable ops(g, k);
    const Wavefunction psi0 = gen.state(g);
    std::vector<PhotonOutcome> rec = gen.record(gen.integer(1, 12));
    const Wavefunction ref = apply_sequence(psi0, rec, ops);
    const double p_ref = sequence_probability(psi0, rec, k).step_product;
    gen.shuffle(rec);
    ASSERT_LE(l2_distance(apply_sequence(psi0, rec, ops), ref), 1e-10) << c;
    ASSERT_NEAR(sequence_probability(psi0, rec, k).step_product, p_ref, 1e-12) << c;
  }
}

TEST(Property, AggregateMatchesSequential) {
  Gen gen(7);
  for (int c = 0; c < kCases; ++c) {
    const double k = gen.k();
    const Grid g = gen.grid(k, 513);
    const OperatorTable ops(g, k);
    const Wavefunction psi0 = gen.state(g);
    const std::vector<PhotonOutcome> rec = gen.record(gen.integer(1, 20));
    const auto n_b = std::count(rec.begin(), rec.end(), PhotonOutcome::kB);
    const auto n_a = static_cast<std::int64_t>(rec.size()) - n_b;
    ASSERT_LE(l2_distance(aggregate_operator(psi0, n_a, n_b, ops), apply_sequence(psi0, rec, ops)),
              1e-10)
        << c;
  }
}

TEST(Property, StepProductMatchesClosedForm) {
  Gen gen(8);
  for (int c = 0; c < kCases; ++c) {
    const double k = gen.k();
    const Wavefunction psi0 = gen.state(gen.grid(k, 513));
    const std::vector<PhotonOutcome> rec = gen.record(gen.integer(1, 200));
    const SequenceProbability p = sequence_probability(psi0, rec, k);
    ASSERT_NEAR(p.log_step_product, p.log_closed_form, 1e-9) << c;
  }
}

TEST(Property, CountDistributionExhaustive) {
  Gen gen(9);
  for (int c = 0; c < kCases; ++c) {
    const double k = gen.k();
    const Grid g = gen.grid(k, 513);
    const Wavefunction psi0 = gen.state(g);
    const std::int64_t n = gen.integer(1, 12);
    const std::vector<double> p = outcome_distribution(psi0, n, OperatorTable(g, k));
    ASSERT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9) << c;
    for (double v : p) ASSERT_GE(v, 0.0);
  }
}

TEST(Property, AllRecordsSumToOne) {
  Gen gen(10);
  for (int c = 0; c < 10; ++c) {
    const double k = gen.k();
    const Wavefunction psi0 = gen.state(gen.grid(k, 257));
    const int n = static_cast<int>(gen.integer(1, 8));
    double total = 0.0;
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      std::vector<PhotonOutcome> rec(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) rec[j] = (bits >> j) & 1u ? PhotonOutcome::kB : PhotonOutcome::kA;
      total += sequence_probability(psi0, rec, k).closed_form;
    }
    ASSERT_NEAR(total, 1.0, 1e-9) << c;
  }
}

TEST(Property, GaussianMinimumUncertainty) {
  Gen gen(11);
  for (int c = 0; c < kCases; ++c) {
    const Grid g(-1.0, 1.0, 4097);
    const double sigma = gen.uniform(0.02, 0.15);
    const double x0 = gen.uniform(-0.2, 0.2);
    const double p0 = gen.uniform(-100.0, 100.0);
    const double hbar = gen.uniform(0.5, 2.0);
    const Wavefunction psi = init_gaussian(g, x0, sigma, p0, hbar);
    const double product = std::sqrt(position_variance(psi) * momentum_variance(psi));
    ASSERT_NEAR(product / (0.5 * hbar), 1.0, 1e-5) << c;
    ASSERT_NEAR(momentum_mean(psi), p0, 1e-6 * std::max(1.0, std::abs(p0))) << c;
  }
}

TEST(Property, EstimateOnLattice) {
  Gen gen(12);
  for (int c = 0; c < 1000; ++c) {
    const double k = gen.k();
    const std::int64_t n = gen.integer(1, 100000);
    const std::int64_t n_b = gen.integer(0, n);
    const double x = estimate_position(n - n_b, n_b, n, k);
    ASSERT_LE(std::abs(x), 0.5 / k * (1 + 1e-15));
    const double steps = (x + 0.5 / k) / resolution(n, k);
    ASSERT_NEAR(steps, static_cast<double>(n_b), 1e-6);
  }
}

TEST(Property, KernelsAgree) {
  Gen gen(13);
  for (int c = 0; c < 12; ++c) {
    const double k = gen.k();
    const Grid g = gen.grid(k, 1025);
    const OperatorTable ops(g, k);
    const Wavefunction psi0 = gen.state(g);
    const std::int64_t n = gen.integer(1, 1500);
    const std::uint64_t seed = gen.seed();
    const TrajectoryRecord a = run_trajectory(psi0, n, ops, seed, TrajectoryKernel::kDensity);
    const TrajectoryRecord b = run_trajectory(psi0, n, ops, seed, TrajectoryKernel::kStateVector);
    ASSERT_EQ(a.outcomes, b.outcomes) << c;
    ASSERT_LE(l2_distance(a.final_state, b.final_state), 1e-8) << c;
  }
}
