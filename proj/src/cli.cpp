#include "wavecollapse/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "wavecollapse/acceptance.hpp"
#include "wavecollapse/ensemble.hpp"
#include "wavecollapse/errors.hpp"
#include "wavecollapse/io.hpp"
#include "wavecollapse/rng.hpp"
#include "wavecollapse/trajectory.hpp"

namespace wavecollapse {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, key + ": " + why);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string normalize_key(std::string_view key) {
  std::string k(trim(key));
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) invalid(key, "cannot parse '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  invalid(key, "expected true or false, got '" + value + "'");
}

// Settings are applied in this fixed order, so x-min can override the
// symmetric bound set by x-max.
const std::vector<std::string> kKeys = {
    "psi0",   "k",  "n-photons", "trajectories", "seed",        "grid-points",
    "x-max",  "x-min", "sigma0", "x0",           "p0",          "lobe-weight",
    "threads", "hbar", "out-dir", "small-kx-window", "gaussian-checks"};

void apply(SimConfig& c, const std::string& key, const std::string& value) {
  if (key == "psi0") c.psi0 = psi0_family_from_string(value);
  else if (key == "k") c.k = parse_number<double>(key, value);
  else if (key == "n-photons") c.n_photons = parse_number<std::int64_t>(key, value);
  else if (key == "trajectories") c.trajectories = parse_number<std::int64_t>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "grid-points") c.grid_points = parse_number<std::size_t>(key, value);
  else if (key == "x-max") {
    c.x_max = parse_number<double>(key, value);
    c.x_min = -c.x_max;
  } else if (key == "x-min") c.x_min = parse_number<double>(key, value);
  else if (key == "sigma0") c.sigma0 = parse_number<double>(key, value);
  else if (key == "x0") c.x0 = parse_number<double>(key, value);
  else if (key == "p0") c.p0 = parse_number<double>(key, value);
  else if (key == "lobe-weight") c.lobe_weight = parse_number<double>(key, value);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
  else if (key == "hbar") c.hbar = parse_number<double>(key, value);
  else if (key == "out-dir") c.out_dir = value;
  else if (key == "small-kx-window") c.small_kx_window = parse_number<double>(key, value);
  else if (key == "gaussian-checks") c.gaussian_checks = parse_bool(key, value);
  else invalid(key, "unknown setting");
}

std::string describe(const std::string& key) {
  static const std::map<std::string, std::string> text = {
      {"psi0", "initial state family: gaussian or two-lobe"},
      {"k", "photon wavenumber"},
      {"n-photons", "photons per trajectory"},
      {"trajectories", "trajectories per ensemble"},
      {"seed", "master seed"},
      {"grid-points", "number of grid points"},
      {"x-max", "grid half-width (sets x-min = -x-max)"},
      {"x-min", "left grid edge"},
      {"sigma0", "Gaussian width, or width of each lobe"},
      {"x0", "Gaussian centre, or lobe offset"},
      {"p0", "initial momentum"},
      {"lobe-weight", "probability in the +x0 lobe"},
      {"threads", "worker threads, 0 = all cores"},
      {"hbar", "reduced Planck constant"},
      {"out-dir", "directory for report files"},
      {"small-kx-window", "|kx| window for the small-angle Gaussian form"},
      {"gaussian-checks", "require the initial state inside the small-kx window (true/false)"},
  };
  auto it = text.find(key);
  return it == text.end() ? std::string{} : it->second;
}

std::string path_in(const SimConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out_dir) / name).string();
}

std::string error_json(std::string_view code, std::string_view message) {
  return fmt::format(R"({{"error": "{}", "message": "{}"}})", json_escape(code),
                     json_escape(message));
}

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kSingle: return "single";
    case RunMode::kEnsemble: return "ensemble";
    case RunMode::kVerify: return "verify";
    case RunMode::kDumpOperators: return "dump-operators";
  }
  return "unknown";
}

RunMode run_mode_from_string(std::string_view name) {
  if (name == "single") return RunMode::kSingle;
  if (name == "ensemble") return RunMode::kEnsemble;
  if (name == "verify") return RunMode::kVerify;
  if (name == "dump-operators" || name == "dump_operators") return RunMode::kDumpOperators;
  invalid("mode", "expected single, ensemble, verify or dump-operators, got '" +
                      std::string(name) + "'");
}

Settings parse_settings(std::string_view text) {
  Settings out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidConfig,
                  fmt::format("line {}: expected key = value", line_no));
    }
    const std::string key = normalize_key(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kInvalidConfig, fmt::format("line {}: empty key", line_no));
    }
    out[key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

Settings read_settings_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_settings(ss.str());
}

const std::vector<std::string>& known_setting_keys() { return kKeys; }

SimConfig config_from_settings(const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "mode") continue;
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      invalid(key, "unknown setting");
    }
    if (value.empty()) invalid(key, "missing value");
  }
  Psi0Family family = Psi0Family::kGaussian;
  if (auto it = settings.find("psi0"); it != settings.end()) {
    family = psi0_family_from_string(it->second);
  }
  SimConfig c = SimConfig::defaults_for(family);
  for (const std::string& key : kKeys) {
    if (auto it = settings.find(key); it != settings.end()) apply(c, key, it->second);
  }
  c.validate();
  return c;
}

int run_mode(RunMode mode, const SimConfig& config, std::ostream& out,
             const std::vector<int>& verify_only) {
  std::filesystem::create_directories(config.out_dir);
  switch (mode) {
    case RunMode::kSingle: {
      const Wavefunction psi0 = config.initial_state();
      const TrajectoryRecord rec =
          run_trajectory(psi0, config.n_photons, config.k, derive_seed(config.seed, 0));
      write_text_file(path_in(config, "trajectory.json"), trajectory_json(rec));
      std::ostringstream csv;
      write_wavefunction_csv(csv, rec.final_state);
      write_text_file(path_in(config, "final_state.csv"), csv.str());
      out << fmt::format("n_a={} n_b={} x_est={:.17g} log_prob={:.17g}{}\n", rec.n_a,
                         rec.n_b, rec.x_est, rec.log_prob,
                         rec.tuning_violated ? " (tuning violated)" : "");
      return kExitOk;
    }
    case RunMode::kEnsemble: {
      const EnsembleStats stats = run_ensemble(config);
      write_text_file(path_in(config, "ensemble.json"), ensemble_json(stats, &config));
      write_text_file(path_in(config, "histogram.csv"), histogram_csv(stats));
      for (const Comparison& c : stats.comparisons) {
        out << fmt::format("{:<5} {:<30} simulated={:.10g} predicted={:.10g} tolerance={:.4g}\n",
                           c.passed ? "ok" : (c.applicable ? "FAIL" : "n/a"), c.name,
                           c.simulated, c.predicted, c.tolerance);
      }
      return kExitOk;
    }
    case RunMode::kVerify: {
      AcceptanceOptions opts;
      opts.seed = config.seed;
      opts.threads = config.threads;
      opts.only = verify_only;
      opts.on_result = [&out](const CriterionResult& r) {
        out << summary_line(r) << '\n' << std::flush;
      };
      const std::vector<CriterionResult> results = run_acceptance(opts);
      write_text_file(path_in(config, "verify.json"), acceptance_json(results));
      const bool ok = std::all_of(results.begin(), results.end(),
                                  [](const CriterionResult& r) { return r.passed(); });
      return ok ? kExitOk : kExitCheckFailed;
    }
    case RunMode::kDumpOperators:
      write_text_file(path_in(config, "operators.csv"), operators_csv(config.grid(), config.k));
      return kExitOk;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photon-by-photon simulation of position measurement collapse"};
  std::string mode = "ensemble";
  std::string config_path;
  std::vector<int> only;
  app.add_option("--mode", mode, "single, ensemble, verify or dump-operators")
      ->capture_default_str();
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--only", only, "verify mode: run only these criterion ids");
  std::map<std::string, std::string> flags;
  for (const std::string& key : kKeys) {
    app.add_option("--" + key, flags[key], describe(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()) << '\n';
    return kExitUsage;
  }

  try {
    Settings settings;
    if (!config_path.empty()) settings = read_settings_file(config_path);
    for (const std::string& key : kKeys) {
      if (app.count("--" + key) > 0) settings[key] = flags[key];
    }
    if (app.count("--mode") == 0) {
      if (auto it = settings.find("mode"); it != settings.end()) mode = it->second;
    }
    const RunMode run = run_mode_from_string(mode);
    const SimConfig config = config_from_settings(settings);
    return run_mode(run, config, out, only);
  } catch (const Error& e) {
    err << error_json(to_string(e.code()), e.what()) << '\n';
    return e.code() == ErrorCode::kInvalidConfig || e.code() == ErrorCode::kBranchViolation
               ? kExitUsage
               : kExitRuntime;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()) << '\n';
    return kExitRuntime;
  }
}

}  // namespace wavecollapse
