#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wavecollapse/config.hpp"
#include "wavecollapse/ensemble.hpp"
#include "wavecollapse/trajectory.hpp"
#include "wavecollapse/wavefunction.hpp"

namespace wavecollapse {

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

// Minimal streaming JSON writer with stable key order and 2-space
// indentation. Non-finite numbers are written as null.
class JsonWriter {
 public:
  // A compact object is written on a single line.
  JsonWriter& begin_object(bool compact = false);
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }

  template <typename T>
  JsonWriter& field(std::string_view name, const T& v) {
    key(name);
    return value(v);
  }

  // The document so far, with a trailing newline once the root is closed.
  std::string str() const;

 private:
  struct Level {
    bool is_object;
    bool empty;
    bool compact = false;
  };
  void before_value();
  void newline();

  std::string out_;
  std::vector<Level> stack_;
  bool after_key_ = false;
};

std::string json_escape(std::string_view s);

// Wavefunction CSV: header "x,re,im", one row per grid point.
void write_wavefunction_csv(std::ostream& os, const Wavefunction& psi);
// Reads the format above. The x column must be a uniform grid.
Wavefunction read_wavefunction_csv(std::istream& is, double hbar = 1.0);

// {seed, N, k, n_a, n_b, x_est, outcomes, log_prob, tuning_violated}
std::string trajectory_json(const TrajectoryRecord& record);

// Parameters (when config is given), summary moments, warning counts and the
// comparison table.
std::string ensemble_json(const EnsembleStats& stats, const SimConfig* config = nullptr);

// bin_center,count,predicted_probability for every lattice value of x_est
// that was observed or has predicted probability >= kHistogramProbabilityFloor.
inline constexpr double kHistogramProbabilityFloor = 1e-12;
std::string histogram_csv(const EnsembleStats& stats);

// x,abs2_m_a,abs2_m_b,arg_m_a,arg_m_b over the grid.
std::string operators_csv(const Grid& grid, double k);

// {name, simulated, predicted, tolerance, passed, applicable, detail}
void write_comparison(JsonWriter& w, const Comparison& c);

void write_text_file(const std::string& path, std::string_view content);

}  // namespace wavecollapse
