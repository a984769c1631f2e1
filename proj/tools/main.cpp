#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "gaugep/oracle.hpp"
#include "gaugep/rng.hpp"
#include "gaugep/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gaugep;
using namespace gaugep::cli;

namespace {

constexpr int kExitConfig = 2, kExitRunFailed = 3, kExitGuard = 4;

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return nullptr;
    return x > 0 ? "inf" : "-inf";
}

class Csv {
public:
    Csv(const fs::path& p, const std::string& hash, const std::vector<std::string>& cols) : f_(p) {
        if (!f_) throw ConfigError("cannot write " + p.string());
        f_ << std::setprecision(12);
        f_ << "# config_sha256=" << hash << "\n";
        for (std::size_t i = 0; i < cols.size(); ++i) f_ << (i ? "," : "") << cols[i];
        f_ << "\n";
    }
    Csv& row(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) f_ << ",";
            if (std::isnan(v[i]))
                f_ << "nan";
            else
                f_ << v[i];
        }
        f_ << "\n";
        return *this;
    }

private:
    std::ofstream f_;
};

fs::path prepare_out(const RunConfig& c) {
    const fs::path out = c.get("output.dir");
    fs::create_directories(out);
    std::ofstream(out / "config.ini") << c.serialize();
    return out;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2) << "\n"; }

double analytic_V(const ResolvedRun& r, double t) {
    const ModelSpec& m = r.sc.model;
    if (!m.dense || r.gauge.diffusion == DiffusionGauge::adaptive) return std::nan("");
    const auto im = InitialMoments::deterministic(r.sc.n_analysis);
    const int M = m.sites();
    switch (r.method) {
        case Method::positiveP: return V_positiveP(t, m, im);
        case Method::diffusionOnly: return V_positiveP_general(t, m, gauge_matrix(r.gauge, M), im);
        case Method::gaugeP: return V_gaugeP(t, m, gauge_matrix(r.gauge, M), im);
    }
    return std::nan("");
}

int cmd_run(const RunConfig& c) {
    const ResolvedRun r = resolve(c);
    const fs::path out = prepare_out(c);
    const std::string h = c.hash();
    const EnsembleSeries s =
        run_ensemble(r.sc.model, r.gauge, r.stepper, r.n_traj, r.seed, r.grid, r.sc.observables, r.options);

    for (std::size_t o = 0; o < s.names.size(); ++o) {
        Csv f(out / (s.names[o] + ".csv"), h, {"t", "mean_re", "mean_im", "stderr", "n_used", "excluded_fraction"});
        for (const auto& p : s.points) {
            if (!p.recorded[o]) continue;
            const auto& e = p.estimates[o];
            f.row({p.t, e.mean.real(), e.mean.imag(), e.stderr_, double(p.n_used), p.excluded_fraction});
        }
    }
    {
        Csv f(out / "variance.csv", h, {"t", "V_empirical", "V_analytic"});
        for (const auto& p : s.points) f.row({p.t, p.V, analytic_V(r, p.t)});
    }
    const ModelSpec& m = r.sc.model;
    const bool oracle = r.scenario == "bose_hubbard_quench" && !m.has_linear() && m.interacting();
    if (oracle) {
        std::vector<std::string> cols{"t", "a_re", "a_im"};
        const int M = m.sites();
        for (int dn = 1; dn <= M / 2; ++dn) cols.push_back("g1_" + std::to_string(dn));
        Csv f(out / "oracle.csv", h, cols);
        for (const auto& p : s.points) {
            const cplx a = fock_diagonal_evolve(m, r.sc.phi, p.t, {{}, {0}});
            std::vector<double> row{p.t, a.real(), a.imag()};
            for (int dn = 1; dn <= M / 2; ++dn) row.push_back(fock_g1(m, r.sc.phi, p.t, dn));
            f.row(row);
        }
    }
    const auto g = gauge_integrals(m, r.sc.n_analysis);
    json j;
    j["config_sha256"] = h;
    j["scenario"] = r.scenario;
    j["method"] = method_name(r.method);
    j["gauge"] = r.gauge.describe();
    j["trajectories"] = r.n_traj;
    j["seed"] = r.seed;
    j["dt"] = r.stepper.dt;
    j["halted"] = s.halted;
    j["t_sim_empirical"] = num(s.t_sim_empirical);
    j["t_sim_analytic"] = num(tsim_best(g, r.method));
    j["unreliable"] = s.unreliable;
    j["excluded_fraction"] = s.points.empty() ? 0.0 : s.points.back().excluded_fraction;
    j["t_last"] = s.points.empty() ? 0.0 : s.points.back().t;
    j["wall_seconds"] = s.wall_seconds;
    j["oracle_overlay"] = oracle;
    j["linear_coupling_neglected_in_analytics"] = m.has_linear();
    write_json(out / "summary.json", j);
    std::cout << "t_sim_empirical " << s.t_sim_empirical << "  excluded " << j["excluded_fraction"] << "  wall "
              << s.wall_seconds << " s\n";
    return 0;
}

json estimates_json(const std::vector<TsimEstimate>& est) {
    json a = json::array();
    for (const auto& e : est)
        a.push_back({{"regime", e.regime}, {"t_sim", num(e.t)}, {"condition", e.condition}, {"applies", e.applies}});
    return a;
}

int cmd_analyze(const RunConfig& c) {
    const Scenario sc = build_scenario(c);
    const double t_opt = c.is_auto("method.t_opt") ? sc.t_opt : c.number("method.t_opt");
    const auto g = gauge_integrals(sc.model, sc.n_analysis);
    double t_max = c.is_auto("analyze.t_max") ? 2.0 * tsim_best(g, Method::gaugeP) : c.number("analyze.t_max");
    if (!std::isfinite(t_max)) t_max = sc.t_end;
    const double a_fixed = c.is_auto("method.a") ? -1.0 : c.number("method.a");
    const auto r = analyze_variance(sc.model, sc.n_analysis, t_opt, t_max, static_cast<int>(c.integer("analyze.samples")),
                                    a_fixed);
    const fs::path out = prepare_out(c);
    const std::string h = c.hash();
    json j;
    j["config_sha256"] = h;
    j["integrals"] = {{"I1", r.integrals.I1}, {"I2", r.integrals.I2}, {"I1P", r.integrals.I1P},
                      {"I2P", r.integrals.I2P}, {"U0", r.integrals.U0}};
    j["t_opt"] = r.t_opt;
    j["a_gauge_p"] = r.a_gaugeP;
    j["a_diffusion_only"] = r.a_diffusionOnly;
    for (const auto& [k, v] : r.tsim_estimates) j["t_sim"][k] = estimates_json(v);
    j["t_sim_best"] = {{"gauge_p", num(r.strategy.tsim_gaugeP)},
                       {"positive_p", num(r.strategy.tsim_positiveP)},
                       {"diffusion_only", num(r.strategy.tsim_diffusionOnly)}};
    j["strategy"] = {{"diffusion_only_preferred", r.strategy.diffusion_only_preferred},
                     {"diffusion_gauge_useful", r.strategy.diffusion_gauge_useful},
                     {"contact_heuristic_many_modes", r.strategy.contact_heuristic_many_modes}};
    j["recommendation"] = r.strategy.diffusion_only_preferred ? "diffusion_only" : "gauge_p";
    j["linear_coupling_neglected"] = r.linear_coupling_neglected;
    write_json(out / "analysis.json", j);

    std::vector<std::string> cols{"t"};
    for (const auto& cv : r.curves) cols.push_back(std::string("V_") + method_name(cv.method));
    Csv f(out / "variance_curves.csv", h, cols);
    if (!r.curves.empty())
        for (std::size_t i = 0; i < r.curves[0].t.size(); ++i) {
            std::vector<double> row{r.curves[0].t[i]};
            for (const auto& cv : r.curves) row.push_back(cv.V[i]);
            f.row(row);
        }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_oracle(const RunConfig& c) {
    const ResolvedRun r = resolve(c);
    const ModelSpec& m = r.sc.model;
    std::string kind = c.get("oracle.kind");
    if (kind == "auto") kind = (!m.has_linear() && m.components == 1) ? "fock" : "ed";
    const fs::path out = prepare_out(c);
    const std::string h = c.hash();
    const int M = m.sites();
    if (kind == "fock") {
        FockCutoff fc{static_cast<int>(c.integer("oracle.cutoff"))};
        std::vector<std::string> cols{"t", "a_re", "a_im"};
        for (int dn = 1; dn <= M / 2; ++dn) cols.push_back("g1_" + std::to_string(dn));
        Csv f(out / "oracle.csv", h, cols);
        std::vector<double> ts{0.0};
        ts.insert(ts.end(), r.grid.begin(), r.grid.end());
        for (double t : ts) {
            const cplx a = fock_diagonal_evolve(m, r.sc.phi, t, {{}, {0}}, fc);
            std::vector<double> row{t, a.real(), a.imag()};
            for (int dn = 1; dn <= M / 2; ++dn) row.push_back(fock_g1(m, r.sc.phi, t, dn));
            f.row(row);
        }
    } else if (kind == "ed") {
        ExactDiagonalizer ed(m, r.sc.phi, static_cast<int>(c.integer("oracle.cutoff")));
        const int K = m.modes();
        std::vector<std::string> cols{"t", "a0_re", "a0_im"};
        for (int k = 0; k < K; ++k) cols.push_back("n_" + std::to_string(k));
        cols.insert(cols.end(), {"g2_00", "norm", "energy"});
        Csv f(out / "oracle.csv", h, cols);
        std::vector<double> ts{0.0};
        ts.insert(ts.end(), r.grid.begin(), r.grid.end());
        for (double t : ts) {
            ed.evolve_to(t);
            const cplx a = ed.expect({{}, {0}});
            std::vector<double> row{t, a.real(), a.imag()};
            for (int k = 0; k < K; ++k) row.push_back(ed.expect({{k}, {k}}).real());
            const double n0 = row[3];
            row.push_back(n0 > 0.0 ? ed.expect({{0, 0}, {0, 0}}).real() / (n0 * n0) : std::nan(""));
            row.push_back(ed.norm());
            row.push_back(ed.energy());
            f.row(row);
        }
    } else {
        throw ConfigError("unknown oracle kind '" + kind + "'");
    }
    std::cout << "wrote " << (out / "oracle.csv").string() << "\n";
    return 0;
}

int cmd_bench(const RunConfig& c) {
    const fs::path out = prepare_out(c);
    const std::string h = c.hash();
    const int steps = static_cast<int>(c.integer("bench.steps"));
    const int ntr = static_cast<int>(c.integer("bench.trajectories"));
    if (steps < 1 || ntr < 1) throw ConfigError("bench needs positive steps and trajectories");
    Csv f(out / "bench.csv", h, {"M", "seconds_per_step"});
    std::vector<double> lm, lt;
    StepperConfig st;
    st.dt = c.is_auto("stepper.dt") ? 1e-4 : c.number("stepper.dt");
    st.scheme = parse_scheme(c.get("stepper.scheme"));
    for (double Md : c.numbers("bench.sizes")) {
        const int M = static_cast<int>(Md);
        const auto lat = LatticeSpec::line(M, 100.0 * M / 64.0);
        const ModelSpec m = build_model(lat, InteractionPotential{-5.96e7, 12.5, 2.0, 3.0}, SparseC(M, M), false);
        SpectralKernel k(m, GaugeConfig::positive_p());
        std::vector<TrajectoryState> tr(ntr, init_coherent(VectorXcd::Constant(M, 0.1)));
        std::vector<double> z(noise_count(m));
        const double sc = 1.0 / std::sqrt(st.dt);
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < 3; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int j = 0; j < ntr; ++j) {
                NormalStream rng(1, j);
                for (int sidx = 0; sidx < steps; ++sidx) {
                    rng.fill(sidx + rep * steps, z.data(), static_cast<int>(z.size()));
                    for (double& v : z) v *= sc;
                    k.advance(tr[j], st, z.data(), tr[j].t);
                }
            }
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
                                      (double(steps) * ntr));
        }
        f.row({double(M), best});
        lm.push_back(std::log(double(M)));
        lt.push_back(std::log(best));
        std::cout << "M " << M << "  " << best << " s/step\n";
    }
    double slope = std::nan("");
    if (lm.size() >= 2) {
        const double n = lm.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lm.size(); ++i) {
            sx += lm[i];
            sy += lt[i];
            sxx += lm[i] * lm[i];
            sxy += lm[i] * lt[i];
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    write_json(out / "bench.json", {{"config_sha256", h}, {"scaling_exponent", num(slope)}});
    std::cout << "scaling exponent " << slope << "\n";
    return 0;
}

int cmd_optimize(const RunConfig& c) {
    const Scenario sc = build_scenario(c);
    const ModelSpec& m = sc.model;
    const double t_opt = c.is_auto("method.t_opt") ? sc.t_opt : c.number("method.t_opt");
    VectorXcd n = sc.n_analysis;
    const std::string prof = c.get("optimize.profile");
    const int M = m.sites();
    if (prof == "gauss" || prof == "uniform") {
        if (m.lattice.dims() != 1) throw ConfigError("density profiles need a line lattice");
        const VectorXd x = line_positions(m.lattice);
        const double nbar = c.number("optimize.nbar"), sig = c.number("optimize.sigma"), dV = m.lattice.cell_volume();
        for (int i = 0; i < M; ++i)
            n[i] = prof == "uniform" ? nbar * dV : nbar * std::exp(-x[i] * x[i] / (2.0 * sig * sig)) * dV;
    } else if (prof != "scenario") {
        throw ConfigError("unknown density profile '" + prof + "'");
    }
    const double a_glob = a_best_global(m, n, t_opt);
    const double V_glob = gauge_objective(m, n, t_opt, global_O(M, a_glob));
    GaugeConfig init;
    const std::string in = c.get("optimize.init");
    if (in == "global")
        init = GaugeConfig::gauge_p(a_glob);
    else if (in == "none")
        init = GaugeConfig::gauge_p(0.0);
    else if (in == "nonlocal")
        init = GaugeConfig::nonlocal(nonlocal_A(m, n.real(), t_opt), true);
    else
        throw ConfigError("unknown optimiser init '" + in + "'");
    OptimizerOptions oo;
    oo.max_iterations = static_cast<int>(c.integer("optimize.max_iterations"));
    const auto res = optimize_O_numeric(m, n, t_opt, init, oo);
    const fs::path out = prepare_out(c);
    const std::string h = c.hash();
    const VectorXd ax = gauge_profile_local(res.O), ar = gauge_profile_nonlocal(res.O);
    Csv f(out / "gauge_profile.csv", h, {"mu", "a_x", "a_r"});
    for (int i = 0; i < M; ++i) f.row({double(i), ax[i], ar[i]});
    json j{{"config_sha256", h},     {"t_opt", t_opt},           {"a_best_global", a_glob},
           {"V_global", V_glob},     {"V_init", res.V_init},     {"V_optimized", res.V_final},
           {"reduction", V_glob / res.V_final}, {"iterations", res.iterations}, {"converged", res.converged}};
    write_json(out / "optimize.json", j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gauge-P phase-space simulator"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed, traj, dt, tfin, method, gauge, engine, threads, out;
    app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "override section.key=value")->take_all();
    app.add_option("--seed", seed, "master seed");
    app.add_option("--trajectories", traj, "number of trajectories");
    app.add_option("--dt", dt, "time step");
    app.add_option("--t-fin", tfin, "final time");
    app.add_option("--method", method, "positive_p | gauge_p | diffusion_only");
    app.add_option("--gauge", gauge, "global | adaptive | nonlocal | none");
    app.add_option("--engine", engine, "direct | spectral");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--out", out, "output directory");
    auto* run = app.add_subcommand("run", "integrate an ensemble")->fallthrough();
    auto* analyze = app.add_subcommand("analyze", "variance analysis without trajectories")->fallthrough();
    auto* oracle = app.add_subcommand("oracle", "exact reference curves")->fallthrough();
    auto* bench = app.add_subcommand("bench", "per-step cost of the spectral engine")->fallthrough();
    auto* optimize = app.add_subcommand("optimize-gauge", "numerical diffusion gauge optimisation")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        RunConfig c;
        if (!config_path.empty()) c.merge_file(config_path);
        for (const auto& s : sets) c.set(s);
        const std::pair<const std::string*, const char*> flags[] = {
            {&seed, "run.seed"},          {&traj, "run.trajectories"}, {&dt, "stepper.dt"},
            {&tfin, "run.t_fin"},         {&method, "method.method"},  {&gauge, "method.gauge"},
            {&engine, "stepper.engine"},  {&threads, "run.threads"},   {&out, "output.dir"}};
        for (const auto& [v, k] : flags)
            if (!v->empty()) c.set(k, *v);

        if (*run) return cmd_run(c);
        if (*analyze) return cmd_analyze(c);
        if (*oracle) return cmd_oracle(c);
        if (*bench) return cmd_bench(c);
        if (*optimize) return cmd_optimize(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ContractViolation& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const RunFailed& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRunFailed;
    } catch (const GuardRefusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kExitGuard;
    }
    return 1;
}
