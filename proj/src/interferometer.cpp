#include "wavecollapse/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wavecollapse/errors.hpp"

namespace wavecollapse {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_positive_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::kInvalidArgument, "k must be positive and finite");
  }
}

void require_counts(std::int64_t n_a, std::int64_t n_b) {
  if (n_a < 0 || n_b < 0 || n_a + n_b < 1) {
    throw Error(ErrorCode::kCountMismatch, "counts must be non-negative with N >= 1");
  }
}

// n * log_term, treating 0 * (-inf) as 0 (no photons at a dark port).
double scaled_log(double n, double log_term) {
  return n == 0.0 ? 0.0 : n * log_term;
}

// (i)^{N/2} e^{iNkx} reduced so the large argument stays accurate.
double kick_phase(std::int64_t n, double k, double x) {
  return static_cast<double>(n) * k * x + static_cast<double>(n % 8) * kQuarterPi;
}

// Builds psi0(x) exp(log_gain(x)) e^{i phase(x)} without overflow, then
// normalizes. log_gain may be -inf.
template <typename LogGain, typename Phase>
Wavefunction reweight(const Wavefunction& psi0, LogGain log_gain, Phase phase) {
  const Grid& g = psi0.grid();
  std::vector<double> s(psi0.size());
  double peak = kNegInf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double mag = std::abs(psi0[i]);
    s[i] = mag > 0.0 ? log_gain(i) + std::log(mag) : kNegInf;
    peak = std::max(peak, s[i]);
  }
  if (peak == kNegInf) {
    throw Error(ErrorCode::kZeroNorm, "operator product annihilates the state");
  }
  std::vector<cplx> amps(psi0.size());
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (s[i] == kNegInf) continue;
    amps[i] = std::polar(std::exp(s[i] - peak), std::arg(psi0[i]) + phase(g.x(i)));
  }
  return normalize(Wavefunction(g, std::move(amps), psi0.hbar())).state;
}

}  // namespace

char to_char(PhotonOutcome outcome) noexcept {
  return outcome == PhotonOutcome::kA ? 'a' : 'b';
}

PhotonOutcome outcome_from_char(char c) {
  switch (c) {
    case 'a':
    case 'A':
      return PhotonOutcome::kA;
    case 'b':
    case 'B':
      return PhotonOutcome::kB;
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("photon outcome must be 'a' or 'b', got '") + c + "'");
  }
}

cplx m_a(double x, double k) noexcept {
  const cplx i_phase = cplx{0.0, 1.0} * std::polar(1.0, 2.0 * k * x);
  return (i_phase + 1.0) / 2.0;
}

cplx m_b(double x, double k) noexcept {
  const cplx i_phase = cplx{0.0, 1.0} * std::polar(1.0, 2.0 * k * x);
  return (i_phase - 1.0) / cplx{0.0, 2.0};
}

double port_a_weight(double x, double k) noexcept {
  return 0.5 * (1.0 - std::sin(2.0 * k * x));
}

double port_b_weight(double x, double k) noexcept {
  return 0.5 * (1.0 + std::sin(2.0 * k * x));
}

bool within_branch(const Grid& grid, double k) noexcept {
  return k * grid.max_abs_x() < kQuarterPi;
}

OperatorTable::OperatorTable(const Grid& grid, double k)
    : grid_(grid), k_(k), within_branch_(false) {
  require_positive_k(k);
  within_branch_ = wavecollapse::within_branch(grid, k);
  const std::size_t n = grid.size();
  m_a_.resize(n);
  m_b_.resize(n);
  w_a_.resize(n);
  w_b_.resize(n);
  log_w_a_.resize(n);
  log_w_b_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    const double s = std::sin(2.0 * k * x);
    m_a_[i] = wavecollapse::m_a(x, k);
    m_b_[i] = wavecollapse::m_b(x, k);
    w_a_[i] = 0.5 * (1.0 - s);
    w_b_[i] = 0.5 * (1.0 + s);
    // log1p keeps full relative accuracy for the small-kx deviations from 1/2.
    log_w_a_[i] = std::log1p(-s) - std::numbers::ln2;
    log_w_b_[i] = std::log1p(s) - std::numbers::ln2;
  }
}

PortProbabilities port_probabilities(const Wavefunction& psi, double k) {
  return port_probabilities(psi, OperatorTable(psi.grid(), k));
}

PortProbabilities port_probabilities(const Wavefunction& psi, const OperatorTable& ops) {
  const Grid& g = psi.grid();
  double total = 0.0;
  double pa = 0.0;
  double pb = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double mass = g.weight(i) * std::norm(psi[i]);
    total += mass;
    pa += mass * ops.weight_a()[i];
    pb += mass * ops.weight_b()[i];
  }
  if (!(total >= kNormFloor)) {
    throw Error(ErrorCode::kZeroNorm, "port probabilities of a zero-norm state");
  }
  return {pa / total, pb / total};
}

OutcomeUpdate apply_outcome(const Wavefunction& psi, PhotonOutcome outcome, double k) {
  return apply_outcome(psi, outcome, OperatorTable(psi.grid(), k));
}

OutcomeUpdate apply_outcome(const Wavefunction& psi, PhotonOutcome outcome,
                            const OperatorTable& ops) {
  if (!(psi.grid() == ops.grid())) {
    throw Error(ErrorCode::kInvalidArgument, "operator table built for another grid");
  }
  const Grid& g = psi.grid();
  const auto weight = ops.weight(outcome);
  double total = 0.0;
  double p = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double mass = g.weight(i) * std::norm(psi[i]);
    total += mass;
    p += mass * weight[i];
  }
  if (!(total >= kNormFloor)) {
    throw Error(ErrorCode::kZeroNorm, "cannot measure a zero-norm state");
  }
  const double probability = p / total;
  if (!(probability >= kNormFloor)) {
    throw Error(ErrorCode::kZeroNorm, std::string("outcome '") + to_char(outcome) +
                                          "' has vanishing probability");
  }
  const double scale = 1.0 / std::sqrt(p);
  const auto m = ops.m(outcome);
  std::vector<cplx> amps(psi.size());
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = m[i] * psi[i] * scale;
  return {Wavefunction(g, std::move(amps), psi.hbar()), probability};
}

Wavefunction aggregate_operator(const Wavefunction& psi0, std::int64_t n_a,
                                std::int64_t n_b, double k) {
  return aggregate_operator(psi0, n_a, n_b, OperatorTable(psi0.grid(), k));
}

Wavefunction aggregate_operator(const Wavefunction& psi0, std::int64_t n_a,
                                std::int64_t n_b, const OperatorTable& ops) {
  require_counts(n_a, n_b);
  if (!ops.within_branch()) {
    throw Error(ErrorCode::kBranchViolation,
                "closed-form product needs k * max|x| < pi/4 on the grid");
  }
  if (!(psi0.grid() == ops.grid())) {
    throw Error(ErrorCode::kInvalidArgument, "operator table built for another grid");
  }
  const double half_a = 0.5 * static_cast<double>(n_a);
  const double half_b = 0.5 * static_cast<double>(n_b);
  const auto la = ops.log_weight_a();
  const auto lb = ops.log_weight_b();
  const std::int64_t n = n_a + n_b;
  const double k = ops.k();
  // The common factor 2^{-N/2} shifts every log-magnitude equally and is
  // removed by normalization; only the x-dependent part is kept.
  return reweight(
      psi0,
      [&](std::size_t i) {
        return half_a * (la[i] + std::numbers::ln2) + half_b * (lb[i] + std::numbers::ln2);
      },
      [&](double x) { return kick_phase(n, k, x); });
}

GaussianApproxFinal gaussian_approx_final(const Wavefunction& psi0, std::int64_t n,
                                          double k, double x_est, double window) {
  require_positive_k(k);
  if (n < 1) throw Error(ErrorCode::kCountMismatch, "N must be at least 1");

  const Grid& g = psi0.grid();
  std::vector<double> outside(psi0.size(), 0.0);
  for (std::size_t i = 0; i < psi0.size(); ++i) {
    if (std::abs(k * g.x(i)) > window) outside[i] = std::norm(psi0[i]);
  }
  const bool flagged =
      integrate(g, outside) > kWindowMassTolerance * norm2(psi0);

  const double nk2 = static_cast<double>(n) * k * k;
  Wavefunction state = reweight(
      psi0,
      [&](std::size_t i) {
        const double u = g.x(i) - x_est;
        return -nk2 * u * u;
      },
      [&](double x) { return kick_phase(n, k, x); });
  return {std::move(state), flagged};
}

double log_count_weight(const Wavefunction& psi0, std::int64_t n_a, std::int64_t n_b,
                        const OperatorTable& ops) {
  if (n_a < 0 || n_b < 0) {
    throw Error(ErrorCode::kCountMismatch, "counts must be non-negative");
  }
  const Grid& g = psi0.grid();
  const auto la = ops.log_weight_a();
  const auto lb = ops.log_weight_b();
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);

  std::vector<double> s(psi0.size());
  double peak = kNegInf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rho = std::norm(psi0[i]);
    if (rho == 0.0) {
      s[i] = kNegInf;
      continue;
    }
    s[i] = std::log(g.weight(i) * rho) + scaled_log(na, la[i] + std::numbers::ln2) +
           scaled_log(nb, lb[i] + std::numbers::ln2);
    peak = std::max(peak, s[i]);
  }
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : s) {
    if (v != kNegInf) sum += std::exp(v - peak);
  }
  return peak + std::log(sum) - (na + nb) * std::numbers::ln2;
}

}  // namespace wavecollapse
