#include "wavecollapse/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "wavecollapse/errors.hpp"
#include "wavecollapse/interferometer.hpp"

namespace wavecollapse {

namespace {

constexpr double kGridUniformityTolerance = 1e-9;

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kIo, fmt::format("line {}: cannot parse number '{}'", line, field));
  }
  return v;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          out += fmt::format("\\u{:04x}", static_cast<unsigned>(c));
        } else {
          out += c;
        }
    }
  }
  return out;
}

void JsonWriter::newline() {
  if (!stack_.empty() && stack_.back().compact) {
    if (out_.back() == ',') out_ += ' ';
    return;
  }
  out_ += '\n';
  out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::before_value() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (stack_.empty()) return;
  if (stack_.back().is_object) {
    throw Error(ErrorCode::kInvalidArgument, "JSON object member needs a key");
  }
  if (!stack_.back().empty) out_ += ',';
  stack_.back().empty = false;
  newline();
}

JsonWriter& JsonWriter::key(std::string_view name) {
  if (stack_.empty() || !stack_.back().is_object || after_key_) {
    throw Error(ErrorCode::kInvalidArgument, "JSON key outside an object");
  }
  if (!stack_.back().empty) out_ += ',';
  stack_.back().empty = false;
  newline();
  out_ += '"';
  out_ += json_escape(name);
  out_ += "\": ";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::begin_object(bool compact) {
  before_value();
  out_ += '{';
  stack_.push_back({true, true, compact});
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  before_value();
  out_ += '[';
  stack_.push_back({false, true});
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  if (stack_.empty() || !stack_.back().is_object || after_key_) {
    throw Error(ErrorCode::kInvalidArgument, "unbalanced JSON object");
  }
  const bool skip = stack_.back().empty || stack_.back().compact;
  stack_.pop_back();
  if (!skip) newline();
  out_ += '}';
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  if (stack_.empty() || stack_.back().is_object) {
    throw Error(ErrorCode::kInvalidArgument, "unbalanced JSON array");
  }
  const bool empty = stack_.back().empty;
  stack_.pop_back();
  if (!empty) newline();
  out_ += ']';
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  before_value();
  out_ += std::isfinite(v) ? format_double(v) : "null";
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  before_value();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  before_value();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  before_value();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  before_value();
  out_ += '"';
  out_ += json_escape(v);
  out_ += '"';
  return *this;
}

std::string JsonWriter::str() const {
  return stack_.empty() && !out_.empty() ? out_ + '\n' : out_;
}

void write_wavefunction_csv(std::ostream& os, const Wavefunction& psi) {
  const Grid& g = psi.grid();
  std::string buf = "x,re,im\n";
  for (std::size_t i = 0; i < psi.size(); ++i) {
    buf += fmt::format("{:.17g},{:.17g},{:.17g}\n", g.x(i), psi[i].real(), psi[i].imag());
  }
  os << buf;
}

Wavefunction read_wavefunction_csv(std::istream& is, double hbar) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::kIo, "empty wavefunction CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,re,im") {
    throw Error(ErrorCode::kIo, "wavefunction CSV header must be x,re,im");
  }
  std::vector<double> xs;
  std::vector<cplx> amps;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string_view sv(line);
    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kIo, fmt::format("line {}: expected 3 columns", line_no));
    }
    xs.push_back(parse_double(sv.substr(0, c1), line_no));
    amps.emplace_back(parse_double(sv.substr(c1 + 1, c2 - c1 - 1), line_no),
                      parse_double(sv.substr(c2 + 1), line_no));
  }
  if (xs.size() < Grid::kMinPoints) {
    throw Error(ErrorCode::kIo, "wavefunction CSV has too few rows for a grid");
  }
  Grid g(xs.front(), xs.back(), xs.size());
  const double tol = kGridUniformityTolerance * (g.x_max() - g.x_min());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - g.x(i)) > tol) {
      throw Error(ErrorCode::kIo, fmt::format("row {}: x column is not a uniform grid", i + 1));
    }
  }
  return Wavefunction(g, std::move(amps), hbar);
}

std::string trajectory_json(const TrajectoryRecord& record) {
  JsonWriter w;
  w.begin_object()
      .field("seed", record.seed)
      .field("N", record.n())
      .field("k", record.k)
      .field("n_a", record.n_a)
      .field("n_b", record.n_b)
      .field("x_est", record.x_est)
      .field("outcomes", record.outcome_string())
      .field("log_prob", record.log_prob)
      .field("tuning_violated", record.tuning_violated)
      .end_object();
  return w.str();
}

void write_comparison(JsonWriter& w, const Comparison& c) {
  w.begin_object()
      .field("name", c.name)
      .field("simulated", c.simulated)
      .field("predicted", c.predicted)
      .field("tolerance", c.tolerance)
      .field("passed", c.passed)
      .field("applicable", c.applicable)
      .field("detail", c.detail)
      .end_object();
}

std::string ensemble_json(const EnsembleStats& stats, const SimConfig* config) {
  JsonWriter w;
  w.begin_object();
  if (config != nullptr) {
    w.key("config").begin_object()
        .field("k", config->k)
        .field("n_photons", config->n_photons)
        .field("grid_points", static_cast<std::uint64_t>(config->grid_points))
        .field("x_min", config->x_min)
        .field("x_max", config->x_max)
        .field("psi0", to_string(config->psi0))
        .field("x0", config->x0)
        .field("sigma0", config->sigma0)
        .field("p0", config->p0)
        .field("lobe_weight", config->lobe_weight)
        .field("trajectories", config->trajectories)
        .field("seed", config->seed)
        .field("hbar", config->hbar)
        .end_object();
  }
  std::int64_t leaking = 0;
  std::int64_t undefined_local = 0;
  std::int64_t off_tune = 0;
  const double tune_limit = 10.0 * std::sqrt(static_cast<double>(stats.n_photons));
  for (const TrajectorySummary& t : stats.trajectories) {
    leaking += t.edge_leakage;
    undefined_local += !t.local_defined;
    off_tune += std::abs(static_cast<double>(t.n_a - t.n_b)) > tune_limit;
  }
  w.field("m_trajectories", stats.m_trajectories)
      .field("N", stats.n_photons)
      .field("k", stats.k)
      .field("hbar", stats.hbar)
      .field("master_seed", stats.master_seed)
      .field("mean_xest", stats.mean_xest)
      .field("var_xest", stats.var_xest)
      .field("mean_p_final", stats.mean_p_final)
      .field("var_p_final", stats.var_p_final)
      .field("mean_var_p_final", stats.mean_var_p_final)
      .field("mean_sigma2_x_final", stats.mean_sigma2_x_final);
  w.key("warnings").begin_object()
      .field("edge_leakage", leaking)
      .field("local_momentum_undefined", undefined_local)
      .field("tuning_violated", off_tune)
      .end_object();
  w.field("passed", all_passed(stats.comparisons));
  w.key("comparisons").begin_array();
  for (const Comparison& c : stats.comparisons) write_comparison(w, c);
  w.end_array();
  w.end_object();
  return w.str();
}

std::string histogram_csv(const EnsembleStats& stats) {
  const XestHistogram& h = stats.xest_histogram;
  const auto& prob = stats.predicted_nb_probability;
  std::string buf = "bin_center,count,predicted_probability\n";
  for (std::int64_t nb = 0; nb <= h.n; ++nb) {
    const auto i = static_cast<std::size_t>(nb);
    const double p = i < prob.size() ? prob[i] : 0.0;
    if (h.counts[i] == 0 && !(p >= kHistogramProbabilityFloor)) continue;
    buf += fmt::format("{:.17g},{},{:.17g}\n", h.center(nb), h.counts[i], p);
  }
  return buf;
}

std::string operators_csv(const Grid& grid, double k) {
  const OperatorTable ops(grid, k);
  std::string buf = "x,abs2_m_a,abs2_m_b,arg_m_a,arg_m_b\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    buf += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", grid.x(i),
                       ops.weight_a()[i], ops.weight_b()[i], std::arg(ops.m_a()[i]),
                       std::arg(ops.m_b()[i]));
  }
  return buf;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace wavecollapse
