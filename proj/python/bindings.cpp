#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "wavecollapse/acceptance.hpp"
#include "wavecollapse/config.hpp"
#include "wavecollapse/ensemble.hpp"
#include "wavecollapse/errors.hpp"
#include "wavecollapse/interferometer.hpp"
#include "wavecollapse/io.hpp"
#include "wavecollapse/trajectory.hpp"
#include "wavecollapse/wavefunction.hpp"

namespace py = pybind11;
using namespace wavecollapse;

namespace {

template <typename T>
py::array_t<T> to_array(std::span<const T> values) {
  py::array_t<T> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& values) {
  return to_array(std::span<const T>(values));
}

DerivativeScheme scheme_from(const std::string& name) {
  if (name == "fd" || name == "finite-difference") return DerivativeScheme::kFiniteDifference;
  if (name == "spectral") return DerivativeScheme::kSpectral;
  throw Error(ErrorCode::kInvalidArgument, "scheme must be 'fd' or 'spectral'");
}

TrajectoryKernel kernel_from(const std::string& name) {
  if (name == "auto") return TrajectoryKernel::kAuto;
  if (name == "density") return TrajectoryKernel::kDensity;
  if (name == "state-vector") return TrajectoryKernel::kStateVector;
  throw Error(ErrorCode::kInvalidArgument, "kernel must be auto, density or state-vector");
}

PhotonOutcome outcome_from(const std::string& s) {
  if (s.size() != 1) throw Error(ErrorCode::kInvalidArgument, "outcome must be 'a' or 'b'");
  return outcome_from_char(s[0]);
}

std::vector<PhotonOutcome> record_from(const std::string& s) {
  std::vector<PhotonOutcome> out;
  out.reserve(s.size());
  for (char c : s) out.push_back(outcome_from_char(c));
  return out;
}

py::dict comparison_dict(const Comparison& c) {
  py::dict d;
  d["name"] = c.name;
  d["simulated"] = c.simulated;
  d["predicted"] = c.predicted;
  d["tolerance"] = c.tolerance;
  d["passed"] = c.passed;
  d["applicable"] = c.applicable;
  d["detail"] = c.detail;
  return d;
}

py::list comparison_list(const std::vector<Comparison>& cs) {
  py::list out;
  for (const Comparison& c : cs) out.append(comparison_dict(c));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Photon-by-photon simulation of position-measurement collapse";

  static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Grid>(m, "Grid")
      .def(py::init<double, double, std::size_t>(), py::arg("x_min"), py::arg("x_max"),
           py::arg("n_points"))
      .def_property_readonly("x_min", &Grid::x_min)
      .def_property_readonly("x_max", &Grid::x_max)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("spacing", &Grid::spacing)
      .def("points", [](const Grid& g) { return to_array(g.points()); })
      .def("__len__", &Grid::size)
      .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; })
      .def("__repr__", [](const Grid& g) {
        return "Grid(" + format_double(g.x_min()) + ", " + format_double(g.x_max()) + ", " +
               std::to_string(g.size()) + ")";
      });

  py::class_<Wavefunction>(m, "Wavefunction")
      .def(py::init([](const Grid& g, py::array_t<cplx, py::array::c_style | py::array::forcecast> a,
                       double hbar) {
             if (a.ndim() != 1) throw Error(ErrorCode::kInvalidArgument, "amplitudes must be 1-D");
             std::vector<cplx> amps(a.data(), a.data() + a.size());
             return Wavefunction(g, std::move(amps), hbar);
           }),
           py::arg("grid"), py::arg("amplitudes"), py::arg("hbar") = 1.0)
      .def_property_readonly("grid", &Wavefunction::grid)
      .def_property_readonly("hbar", &Wavefunction::hbar)
      .def_property_readonly("amplitudes",
                             [](const Wavefunction& w) { return to_array(w.amplitudes()); })
      .def("density", [](const Wavefunction& w) { return to_array(w.density()); })
      .def("mirrored", &Wavefunction::mirrored)
      .def("__len__", &Wavefunction::size);

  m.def("init_gaussian", &init_gaussian, py::arg("grid"), py::arg("x0"), py::arg("sigma0"),
        py::arg("p0") = 0.0, py::arg("hbar") = 1.0);
  m.def(
      "init_two_lobe",
      [](const Grid& g, double x0, double sigma, double weight_plus, double p_plus,
         double p_minus, double hbar) {
        return init_two_lobe(g, TwoLobeParams{x0, sigma, weight_plus, p_plus, p_minus}, hbar);
      },
      py::arg("grid"), py::arg("x0") = 0.03, py::arg("sigma") = 0.005,
      py::arg("weight_plus") = 0.7, py::arg("p_plus") = 0.0, py::arg("p_minus") = 0.0,
      py::arg("hbar") = 1.0);
  m.def("init_flat", &init_flat, py::arg("grid"), py::arg("hbar") = 1.0);
  m.def("init_random_superposition", &init_random_superposition, py::arg("grid"),
        py::arg("seed"), py::arg("hbar") = 1.0);

  m.def("norm2", &norm2);
  m.def("normalize", [](const Wavefunction& w) {
    Normalized n = normalize(w);
    return py::make_tuple(n.state, n.norm2);
  });
  m.def("l2_distance", &l2_distance);
  m.def("position_mean", &position_mean);
  m.def("position_variance", &position_variance);
  m.def(
      "momentum_mean",
      [](const Wavefunction& w, const std::string& s) { return momentum_mean(w, scheme_from(s)); },
      py::arg("psi"), py::arg("scheme") = "fd");
  m.def(
      "momentum_variance",
      [](const Wavefunction& w, const std::string& s) {
        return momentum_variance(w, scheme_from(s));
      },
      py::arg("psi"), py::arg("scheme") = "fd");
  m.def("edge_leakage", [](const Wavefunction& w) { return edge_leakage(w); });
  m.def("local_momentum_density", &local_momentum_density);
  m.def("local_momentum_second_moment", &local_momentum_second_moment);
  m.def("fit_phase_wavenumber", &fit_phase_wavenumber, py::arg("psi"),
        py::arg("rel_threshold") = 1e-3);

  m.def("m_a", py::vectorize(&m_a), py::arg("x"), py::arg("k"));
  m.def("m_b", py::vectorize(&m_b), py::arg("x"), py::arg("k"));
  m.def("port_a_weight", py::vectorize(&port_a_weight), py::arg("x"), py::arg("k"));
  m.def("port_b_weight", py::vectorize(&port_b_weight), py::arg("x"), py::arg("k"));
  m.def("within_branch", &within_branch);
  m.def("port_probabilities", [](const Wavefunction& w, double k) {
    const PortProbabilities p = port_probabilities(w, k);
    return py::make_tuple(p.a, p.b);
  });
  m.def(
      "apply_outcome",
      [](const Wavefunction& w, const std::string& o, double k) {
        OutcomeUpdate u = apply_outcome(w, outcome_from(o), k);
        return py::make_tuple(u.state, u.probability);
      },
      py::arg("psi"), py::arg("outcome"), py::arg("k"));
  m.def("aggregate_operator",
        py::overload_cast<const Wavefunction&, std::int64_t, std::int64_t, double>(
            &aggregate_operator),
        py::arg("psi0"), py::arg("n_a"), py::arg("n_b"), py::arg("k"));
  m.def(
      "gaussian_approx_final",
      [](const Wavefunction& w, std::int64_t n, double k, double x_est, double window) {
        GaussianApproxFinal g = gaussian_approx_final(w, n, k, x_est, window);
        return py::make_tuple(g.state, g.outside_window);
      },
      py::arg("psi0"), py::arg("n"), py::arg("k"), py::arg("x_est"),
      py::arg("window") = kDefaultSmallKxWindow);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("seed", &TrajectoryRecord::seed)
      .def_readonly("k", &TrajectoryRecord::k)
      .def_readonly("n_a", &TrajectoryRecord::n_a)
      .def_readonly("n_b", &TrajectoryRecord::n_b)
      .def_readonly("x_est", &TrajectoryRecord::x_est)
      .def_readonly("final_state", &TrajectoryRecord::final_state)
      .def_readonly("log_prob", &TrajectoryRecord::log_prob)
      .def_readonly("tuning_violated", &TrajectoryRecord::tuning_violated)
      .def_property_readonly("n", &TrajectoryRecord::n)
      .def_property_readonly("outcomes", &TrajectoryRecord::outcome_string)
      .def_property_readonly("step_probabilities",
                             [](const TrajectoryRecord& r) { return to_array(r.step_probabilities); })
      .def("to_json", [](const TrajectoryRecord& r) { return trajectory_json(r); });

  m.def(
      "run_trajectory",
      [](const Wavefunction& psi0, std::int64_t n, double k, std::uint64_t seed,
         const std::string& kernel) {
        py::gil_scoped_release release;
        return run_trajectory(psi0, n, k, seed, kernel_from(kernel));
      },
      py::arg("psi0"), py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("kernel") = "auto");

  m.def("estimate_position", &estimate_position, py::arg("n_a"), py::arg("n_b"), py::arg("n"),
        py::arg("k"));
  m.def("predicted_sigma2_xest", &predicted_sigma2_xest, py::arg("n"), py::arg("k"));
  m.def("resolution", &resolution, py::arg("n"), py::arg("k"));
  m.def(
      "sequence_probability",
      [](const Wavefunction& psi0, const std::string& record, double k) {
        const std::vector<PhotonOutcome> rec = record_from(record);
        const SequenceProbability p = sequence_probability(psi0, rec, k);
        py::dict d;
        d["step_product"] = p.step_product;
        d["closed_form"] = p.closed_form;
        d["log_step_product"] = p.log_step_product;
        d["log_closed_form"] = p.log_closed_form;
        return d;
      },
      py::arg("psi0"), py::arg("record"), py::arg("k"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init([](const std::string& family) {
             return SimConfig::defaults_for(psi0_family_from_string(family));
           }),
           py::arg("psi0") = "gaussian")
      .def_readwrite("k", &SimConfig::k)
      .def_readwrite("n_photons", &SimConfig::n_photons)
      .def_readwrite("grid_points", &SimConfig::grid_points)
      .def_readwrite("x_min", &SimConfig::x_min)
      .def_readwrite("x_max", &SimConfig::x_max)
      .def_readwrite("x0", &SimConfig::x0)
      .def_readwrite("sigma0", &SimConfig::sigma0)
      .def_readwrite("p0", &SimConfig::p0)
      .def_readwrite("lobe_weight", &SimConfig::lobe_weight)
      .def_readwrite("trajectories", &SimConfig::trajectories)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("threads", &SimConfig::threads)
      .def_readwrite("hbar", &SimConfig::hbar)
      .def_readwrite("gaussian_checks", &SimConfig::gaussian_checks)
      .def_readwrite("small_kx_window", &SimConfig::small_kx_window)
      .def_readwrite("out_dir", &SimConfig::out_dir)
      .def_property_readonly("psi0", [](const SimConfig& c) { return std::string(to_string(c.psi0)); })
      .def("grid", &SimConfig::grid)
      .def("initial_state", &SimConfig::initial_state)
      .def("validate", &SimConfig::validate);

  py::class_<EnsembleStats>(m, "EnsembleStats")
      .def_readonly("m_trajectories", &EnsembleStats::m_trajectories)
      .def_readonly("n_photons", &EnsembleStats::n_photons)
      .def_readonly("k", &EnsembleStats::k)
      .def_readonly("mean_xest", &EnsembleStats::mean_xest)
      .def_readonly("var_xest", &EnsembleStats::var_xest)
      .def_readonly("mean_p_final", &EnsembleStats::mean_p_final)
      .def_readonly("var_p_final", &EnsembleStats::var_p_final)
      .def_readonly("mean_var_p_final", &EnsembleStats::mean_var_p_final)
      .def_readonly("mean_sigma2_x_final", &EnsembleStats::mean_sigma2_x_final)
      .def_property_readonly("xest_samples",
                             [](const EnsembleStats& s) { return to_array(s.xest_samples); })
      .def_property_readonly("histogram_counts",
                             [](const EnsembleStats& s) { return to_array(s.xest_histogram.counts); })
      .def_property_readonly("predicted_nb_probability", [](const EnsembleStats& s) {
        return to_array(s.predicted_nb_probability);
      })
      .def_property_readonly("comparisons",
                             [](const EnsembleStats& s) { return comparison_list(s.comparisons); })
      .def_property_readonly("passed",
                             [](const EnsembleStats& s) { return all_passed(s.comparisons); })
      .def("to_json", [](const EnsembleStats& s) { return ensemble_json(s); })
      .def("histogram_csv", [](const EnsembleStats& s) { return histogram_csv(s); });

  m.def("run_ensemble", [](const SimConfig& c) {
    py::gil_scoped_release release;
    return run_ensemble(c);
  });
  m.def(
      "run_ensemble_from",
      [](const Wavefunction& psi0, std::int64_t n, double k, std::int64_t trajectories,
         std::uint64_t seed, unsigned threads, bool compare) {
        py::gil_scoped_release release;
        return run_ensemble(psi0, n, k, trajectories, seed, EnsembleOptions{threads, compare});
      },
      py::arg("psi0"), py::arg("n"), py::arg("k"), py::arg("trajectories"), py::arg("seed"),
      py::arg("threads") = 0, py::arg("compare") = true);

  m.def("outcome_probability_binomial", &outcome_probability_binomial, py::arg("psi0"),
        py::arg("n_b"), py::arg("n"), py::arg("k"));
  m.def(
      "outcome_distribution",
      [](const Wavefunction& psi0, std::int64_t n, double k) {
        return to_array(outcome_distribution(psi0, n, OperatorTable(psi0.grid(), k)));
      },
      py::arg("psi0"), py::arg("n"), py::arg("k"));
  m.def("predicted_xest_density", &predicted_xest_density, py::arg("psi0"), py::arg("n"),
        py::arg("k"), py::arg("x_est"));
  m.def(
      "de_broglie_check",
      [](std::int64_t n, double k, double hbar) {
        const DeBroglieCheck c = de_broglie_check(n, k, hbar);
        return py::make_tuple(c.wavelength, c.momentum, c.product);
      },
      py::arg("n"), py::arg("k"), py::arg("hbar") = 1.0);

  m.def(
      "run_criterion",
      [](int id, std::uint64_t seed, unsigned threads) {
        AcceptanceOptions opts;
        opts.seed = seed;
        opts.threads = threads;
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = run_criterion(id, opts);
        }
        py::dict d;
        d["id"] = r.id;
        d["title"] = r.title;
        d["passed"] = r.passed();
        d["seconds"] = r.seconds;
        d["checks"] = comparison_list(r.checks);
        d["summary"] = summary_line(r);
        return d;
      },
      py::arg("id"), py::arg("seed") = 42, py::arg("threads") = 0);
}
