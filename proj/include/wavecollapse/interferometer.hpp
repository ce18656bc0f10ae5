#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavecollapse/wavefunction.hpp"

namespace wavecollapse {

// Detector port that registered a photon. Serialized as 'a' / 'b'.
enum class PhotonOutcome : std::uint8_t { kA, kB };

char to_char(PhotonOutcome outcome) noexcept;
PhotonOutcome outcome_from_char(char c);

struct InterferometerParams {
  double k = 1.0;                  // photon wavenumber
  bool use_exact_operators = true;  // closed-form products need |kx| < pi/4
};

// Per-photon measurement operators of the tuned interferometer, as
// multiplication operators in x:
//   M_a(x) = (i e^{i2kx} + 1) / 2,   M_b(x) = (i e^{i2kx} - 1) / (2i).
cplx m_a(double x, double k) noexcept;
cplx m_b(double x, double k) noexcept;

// |M_a|^2 = (1 - sin 2kx) / 2 and |M_b|^2 = (1 + sin 2kx) / 2, evaluated in
// real arithmetic so the dark point of a port gives exactly zero.
double port_a_weight(double x, double k) noexcept;
double port_b_weight(double x, double k) noexcept;

// True when k * max|x| < pi/4 on the grid, where cos(kx +- pi/4) > 0.
bool within_branch(const Grid& grid, double k) noexcept;

// Operator values tabulated on a grid for repeated application.
class OperatorTable {
 public:
  OperatorTable(const Grid& grid, double k);

  const Grid& grid() const noexcept { return grid_; }
  double k() const noexcept { return k_; }
  bool within_branch() const noexcept { return within_branch_; }

  std::span<const cplx> m_a() const noexcept { return m_a_; }
  std::span<const cplx> m_b() const noexcept { return m_b_; }
  std::span<const double> weight_a() const noexcept { return w_a_; }
  std::span<const double> weight_b() const noexcept { return w_b_; }
  std::span<const double> log_weight_a() const noexcept { return log_w_a_; }
  std::span<const double> log_weight_b() const noexcept { return log_w_b_; }

  std::span<const cplx> m(PhotonOutcome o) const noexcept {
    return o == PhotonOutcome::kA ? m_a() : m_b();
  }
  std::span<const double> weight(PhotonOutcome o) const noexcept {
    return o == PhotonOutcome::kA ? weight_a() : weight_b();
  }

 private:
  Grid grid_;
  double k_;
  bool within_branch_;
  std::vector<cplx> m_a_;
  std::vector<cplx> m_b_;
  std::vector<double> w_a_;
  std::vector<double> w_b_;
  std::vector<double> log_w_a_;  // -inf where the port is dark
  std::vector<double> log_w_b_;
};

struct PortProbabilities {
  double a = 0.0;
  double b = 0.0;
};

// <psi| M^dagger M |psi> for both ports.
PortProbabilities port_probabilities(const Wavefunction& psi, double k);
PortProbabilities port_probabilities(const Wavefunction& psi, const OperatorTable& ops);

struct OutcomeUpdate {
  Wavefunction state;  // M psi / ||M psi||
  double probability;  // ||M psi||^2
};

// Throws ErrorCode::kZeroNorm when the outcome probability is below 1e-300.
OutcomeUpdate apply_outcome(const Wavefunction& psi, PhotonOutcome outcome, double k);
OutcomeUpdate apply_outcome(const Wavefunction& psi, PhotonOutcome outcome,
                            const OperatorTable& ops);

// Normalized M_a^{n_a} M_b^{n_b} psi0 for any record with these counts.
// The product e^{iN(kx + pi/4)} cos^{n_a}(kx + pi/4) cos^{n_b}(kx - pi/4) is
// accumulated as a log-magnitude plus a phase, so N up to 10^6 neither
// underflows nor loses the momentum-kick phase. The constant 2^{-N/2}
// magnitude is dropped; the (i)^{N/2} phase is kept so the result coincides
// with sequential application of M_a and M_b.
// Throws ErrorCode::kBranchViolation unless k * max|x| < pi/4 on the grid.
Wavefunction aggregate_operator(const Wavefunction& psi0, std::int64_t n_a,
                                std::int64_t n_b, double k);
Wavefunction aggregate_operator(const Wavefunction& psi0, std::int64_t n_a,
                                std::int64_t n_b, const OperatorTable& ops);

// Probability mass of psi0 allowed outside |kx| <= window before the small-kx
// form is flagged.
inline constexpr double kWindowMassTolerance = 1e-6;
inline constexpr double kDefaultSmallKxWindow = 0.1;

struct GaussianApproxFinal {
  Wavefunction state;
  bool outside_window = false;  // psi0 not confined to |kx| <= window
};

// Normalized e^{iN(kx + pi/4)} e^{-N k^2 (x - x_est)^2} psi0(x): the small-kx
// limit of aggregate_operator.
GaussianApproxFinal gaussian_approx_final(const Wavefunction& psi0, std::int64_t n,
                                          double k, double x_est,
                                          double window = kDefaultSmallKxWindow);

// log of integral |M_a^{n_a} M_b^{n_b} psi0|^2 dx, evaluated in the log domain
// from |M_a|^2 and |M_b|^2 (valid on any grid).
double log_count_weight(const Wavefunction& psi0, std::int64_t n_a, std::int64_t n_b,
                        const OperatorTable& ops);

}  // namespace wavecollapse
