#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gaugep/analytics.hpp"
#include "gaugep/gauges.hpp"
#include "gaugep/oracle.hpp"
#include "gaugep/scenarios.hpp"
#include "gaugep/sde.hpp"
#include "gaugep/spectral.hpp"

namespace py = pybind11;
using namespace gaugep;

namespace {

py::dict series_dict(const EnsembleSeries& s) {
    py::dict d;
    std::vector<double> t, V, ex;
    for (const auto& p : s.points) {
        t.push_back(p.t);
        V.push_back(p.V);
        ex.push_back(p.excluded_fraction);
    }
    py::dict obs;
    for (std::size_t o = 0; o < s.names.size(); ++o) {
        std::vector<cplx> mean;
        std::vector<double> err;
        for (const auto& p : s.points) {
            mean.push_back(p.estimates[o].mean);
            err.push_back(p.estimates[o].stderr_);
        }
        obs[py::str(s.names[o])] = py::dict(py::arg("mean") = mean, py::arg("stderr") = err);
    }
    d["t"] = t;
    d["V"] = V;
    d["excluded_fraction"] = ex;
    d["observables"] = obs;
    d["halted"] = s.halted;
    d["t_sim_empirical"] = s.t_sim_empirical;
    d["unreliable"] = s.unreliable;
    d["wall_seconds"] = s.wall_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "gauge-P phase-space simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<RunFailed>(m, "RunFailed", PyExc_RuntimeError);
    py::register_exception<GuardRefusal>(m, "GuardRefusal", PyExc_RuntimeError);
    py::register_exception<DegenerateEstimate>(m, "DegenerateEstimate", PyExc_ArithmeticError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    py::class_<LatticeSpec>(m, "LatticeSpec")
        .def(py::init<>())
        .def_static("line", &LatticeSpec::line, py::arg("sites"), py::arg("box_length"))
        .def_readwrite("extents", &LatticeSpec::extents)
        .def_readwrite("lengths", &LatticeSpec::lengths)
        .def("sites", &LatticeSpec::sites)
        .def("cell_volume", &LatticeSpec::cell_volume);

    py::class_<InteractionPotential>(m, "InteractionPotential")
        .def(py::init<double, double, double, double>(), py::arg("C6"), py::arg("eps") = 1.0,
             py::arg("a_exp") = 2.0, py::arg("b_exp") = 3.0)
        .def("__call__", &InteractionPotential::operator());

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_property_readonly("sites", &ModelSpec::sites)
        .def_property_readonly("modes", &ModelSpec::modes)
        .def_readonly("W0", &ModelSpec::W0)
        .def_readonly("U0", &ModelSpec::U0)
        .def_readonly("w_row", &ModelSpec::w_row)
        .def_readonly("w_tilde", &ModelSpec::w_tilde)
        .def_readonly("W", &ModelSpec::W)
        .def_readonly("U", &ModelSpec::U)
        .def_readonly("lattice", &ModelSpec::lattice);

    m.def("build_model",
          [](const LatticeSpec& lat, const InteractionPotential& pot, double J, bool dense) {
              const SparseC om = J != 0.0 ? tunneling_coupling(lat, J) : SparseC(lat.sites(), lat.sites());
              return build_model(lat, pot, om, dense);
          },
          py::arg("lattice"), py::arg("potential"), py::arg("J") = 0.0, py::arg("dense") = true);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("model", &Scenario::model)
        .def_readonly("phi", &Scenario::phi)
        .def_readonly("n_analysis", &Scenario::n_analysis)
        .def_readonly("t_opt", &Scenario::t_opt)
        .def_readonly("t_end", &Scenario::t_end)
        .def_property_readonly("observable_names", [](const Scenario& s) {
            std::vector<std::string> n;
            for (const auto& o : s.observables) n.push_back(o.name);
            return n;
        });

    m.def("bose_hubbard_quench",
          [](int M, double L, double J, double n0) {
              BhQuenchParams p;
              p.M = M;
              p.L = L;
              p.J = J;
              p.n0 = n0;
              return bose_hubbard_quench(p);
          },
          py::arg("M") = 6, py::arg("L") = 2.0, py::arg("J") = 0.0, py::arg("n0") = 1.2);
    m.def("rydberg_echo",
          [](int M, double N, double C6, double mass) {
              RydbergEchoParams p;
              p.M = M;
              p.N = N;
              p.pot.C6 = C6;
              p.mass = mass;
              return rydberg_echo(p);
          },
          py::arg("M") = 64, py::arg("N") = 500.0, py::arg("C6") = -5.96e7, py::arg("mass") = 0.0);

    py::class_<GaugeConfig>(m, "GaugeConfig")
        .def_static("positive_p", &GaugeConfig::positive_p)
        .def_static("gauge_p", &GaugeConfig::gauge_p, py::arg("a"))
        .def_static("adaptive", &GaugeConfig::adaptive, py::arg("t_fin"))
        .def_static("diffusion_only", &GaugeConfig::diffusion_only, py::arg("a"))
        .def_static("nonlocal_", &GaugeConfig::nonlocal, py::arg("A"), py::arg("drift") = true)
        .def_static("numeric", &GaugeConfig::numeric, py::arg("O"), py::arg("drift") = true)
        .def("describe", &GaugeConfig::describe)
        .def("__repr__", &GaugeConfig::describe);

    py::class_<GaugeIntegrals>(m, "GaugeIntegrals")
        .def(py::init<>())
        .def_readwrite("I1", &GaugeIntegrals::I1)
        .def_readwrite("I2", &GaugeIntegrals::I2)
        .def_readwrite("I1P", &GaugeIntegrals::I1P)
        .def_readwrite("I2P", &GaugeIntegrals::I2P)
        .def_readwrite("U0", &GaugeIntegrals::U0);

    py::enum_<Method>(m, "Method")
        .value("gauge_p", Method::gaugeP)
        .value("positive_p", Method::positiveP)
        .value("diffusion_only", Method::diffusionOnly);

    m.def("gauge_integrals", &gauge_integrals, py::arg("model"), py::arg("n"));
    m.def("a_approx", &a_approx, py::arg("integrals"), py::arg("t_opt"));
    m.def("a_opt_diffusion_only", &a_opt_diffusion_only, py::arg("integrals"), py::arg("t_opt"));
    m.def("tsim", [](const GaugeIntegrals& g, Method me) {
        py::list out;
        for (const auto& e : tsim(g, me))
            out.append(py::dict(py::arg("regime") = e.regime, py::arg("t") = e.t, py::arg("applies") = e.applies));
        return out;
    });
    m.def("tsim_best", &tsim_best);
    m.def("V_gaugeP", [](double t, const ModelSpec& model, const GaugeConfig& g, const VectorXcd& n0) {
        return V_gaugeP(t, model, gauge_matrix(g, model.sites()), InitialMoments::deterministic(n0));
    });
    m.def("V_positiveP", [](double t, const ModelSpec& model, const VectorXcd& n0) {
        return V_positiveP(t, model, InitialMoments::deterministic(n0));
    });
    m.def("gauge_matrix", &gauge_matrix);
    m.def("nonlocal_A", &nonlocal_A, py::arg("model"), py::arg("n"), py::arg("t_opt"));
    m.def("a_best_global", &a_best_global);
    m.def("gauge_objective", &gauge_objective);
    m.def("optimize_O_numeric",
          [](const ModelSpec& model, const VectorXcd& n0, double t_opt, const GaugeConfig& init, int max_iter) {
              OptimizerOptions o;
              o.max_iterations = max_iter;
              const auto r = optimize_O_numeric(model, n0, t_opt, init, o);
              return py::dict(py::arg("O") = r.O, py::arg("V_init") = r.V_init, py::arg("V_final") = r.V_final,
                              py::arg("iterations") = r.iterations, py::arg("converged") = r.converged);
          },
          py::arg("model"), py::arg("n0"), py::arg("t_opt"), py::arg("init"), py::arg("max_iterations") = 400);

    m.def("spectral_drift",
          [](const VectorXcd& n, const ModelSpec& model) { return spectral_drift(n, model.w_tilde, model.lattice); });

    m.def("run_ensemble",
          [](const Scenario& sc, const GaugeConfig& g, int n_traj, std::uint64_t seed, const std::vector<double>& grid,
             double dt, const std::string& scheme, const std::string& engine, int threads, bool halt) {
              StepperConfig st;
              st.dt = dt;
              st.scheme = parse_scheme(scheme);
              RunOptions ro;
              ro.phi = sc.phi;
              ro.engine = parse_engine(engine);
              ro.threads = threads;
              ro.halt_on_variance = halt;
              EnsembleSeries s;
              {
                  py::gil_scoped_release rel;
                  s = run_ensemble(sc.model, g, st, n_traj, seed, grid, sc.observables, ro);
              }
              return series_dict(s);
          },
          py::arg("scenario"), py::arg("gauge"), py::arg("n_traj"), py::arg("seed"), py::arg("t_grid"),
          py::arg("dt") = 1e-4, py::arg("scheme") = "midpoint", py::arg("engine") = "direct", py::arg("threads") = 1,
          py::arg("halt") = true);

    m.def("fock_diagonal_evolve",
          [](const ModelSpec& model, const VectorXcd& phi, double t, std::vector<int> create,
             std::vector<int> annihilate) { return fock_diagonal_evolve(model, phi, t, {create, annihilate}); },
          py::arg("model"), py::arg("phi"), py::arg("t"), py::arg("create"), py::arg("annihilate"));
    m.def("fock_g1", &fock_g1);
    m.def("exact_diag_small",
          [](const ModelSpec& model, const VectorXcd& phi, double t, std::vector<int> create,
             std::vector<int> annihilate, int cutoff) {
              return exact_diag_small(model, phi, cutoff, t, {create, annihilate});
          },
          py::arg("model"), py::arg("phi"), py::arg("t"), py::arg("create"), py::arg("annihilate"),
          py::arg("cutoff") = 0);
}
