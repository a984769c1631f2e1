#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

namespace gaugep::cli {

namespace {

const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"scenario.name", "bose_hubbard_quench"},
        {"model.M", "auto"},
        {"model.L", "auto"},
        {"model.extents", "auto"},
        {"model.lengths", "auto"},
        {"model.J", "0"},
        {"model.mass", "0"},
        {"model.n0", "auto"},
        {"model.C6", "auto"},
        {"model.eps", "auto"},
        {"model.a_exp", "2"},
        {"model.b_exp", "3"},
        {"model.N", "500"},
        {"model.kappa", "3"},
        {"model.tau", "0.18"},
        {"model.Ne_estimate", "8"},
        {"model.snapshots", "0.08,0.12"},
        {"method.method", "gauge_p"},
        {"method.gauge", "auto"},
        {"method.a", "auto"},
        {"method.t_opt", "auto"},
        {"method.gauge_t_fin", "auto"},
        {"stepper.dt", "auto"},
        {"stepper.scheme", "midpoint"},
        {"stepper.midpoint_iters", "3"},
        {"stepper.max_field", "1e15"},
        {"stepper.engine", "direct"},
        {"run.trajectories", "auto"},
        {"run.seed", "1"},
        {"run.t_fin", "auto"},
        {"run.t_step", "0.01"},
        {"run.threads", "1"},
        {"run.batches", "100"},
        {"run.halt", "true"},
        {"run.halt_V", "10"},
        {"output.dir", "out"},
        {"analyze.t_max", "auto"},
        {"analyze.samples", "200"},
        {"optimize.profile", "scenario"},
        {"optimize.nbar", "0.5"},
        {"optimize.sigma", "10"},
        {"optimize.init", "global"},
        {"optimize.max_iterations", "400"},
        {"oracle.kind", "auto"},
        {"oracle.cutoff", "0"},
        {"bench.sizes", "1024,2048,4096,8192,16384"},
        {"bench.steps", "20"},
        {"bench.trajectories", "4"},
    };
    return d;
}

std::vector<std::string> split_list(const std::string& s, const char* sep) {
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(sep));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

double to_number(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' is not a finite number: '" + s + "'");
    }
}

}  // namespace

RunConfig::RunConfig() : v_(defaults()) {}

RunConfig RunConfig::load(const std::string& path) {
    RunConfig c;
    c.merge_file(path);
    return c;
}

void RunConfig::merge_file(const std::string& path) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(path, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    for (const auto& [sec, child] : pt) {
        if (child.empty()) throw ConfigError("key '" + sec + "' outside a section");
        for (const auto& [key, val] : child) set(sec + "." + key, val.get_value<std::string>());
    }
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(boost::trim_copy(assignment.substr(0, eq)), boost::trim_copy(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!defaults().count(key)) throw ConfigError("unknown config key '" + key + "'");
    v_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = v_.find(key);
    if (it == v_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

bool RunConfig::is_auto(const std::string& key) const {
    const auto& s = get(key);
    return s.empty() || s == "auto";
}

double RunConfig::number(const std::string& key) const { return to_number(key, get(key)); }

long RunConfig::integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v)) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<long>(v);
}

bool RunConfig::flag(const std::string& key) const {
    const auto s = boost::to_lower_copy(get(key));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("'" + key + "' must be a boolean");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& p : split_list(get(key), ",x")) out.push_back(to_number(key, p));
    return out;
}

std::string RunConfig::serialize() const {
    std::ostringstream o;
    std::string section;
    for (const auto& [k, v] : v_) {
        const auto dot = k.find('.');
        const std::string sec = k.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) o << "\n";
            o << "[" << sec << "]\n";
            section = sec;
        }
        o << k.substr(dot + 1) << " = " << v << "\n";
    }
    return o.str();
}

std::string RunConfig::hash() const {
    const std::string s = serialize();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(s.data(), s.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream o;
    for (unsigned int i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return o.str();
}

Method parse_method(const std::string& s) {
    if (s == "gauge_p") return Method::gaugeP;
    if (s == "positive_p") return Method::positiveP;
    if (s == "diffusion_only") return Method::diffusionOnly;
    throw ConfigError("unknown method '" + s + "'");
}

namespace {

InteractionPotential potential(const RunConfig& c, InteractionPotential base) {
    if (!c.is_auto("model.C6")) base.C6 = c.number("model.C6");
    if (!c.is_auto("model.eps")) base.eps = c.number("model.eps");
    base.a_exp = c.number("model.a_exp");
    base.b_exp = c.number("model.b_exp");
    if (!(base.eps > 0.0)) throw ConfigError("model.eps must be positive");
    return base;
}

bool dense_for(const RunConfig& c, int M) {
    return c.get("stepper.engine") == "direct" || M <= 4096;
}

}  // namespace

Scenario build_scenario(const RunConfig& c) {
    const std::string name = c.get("scenario.name");
    if (name == "bose_hubbard_quench") {
        BhQuenchParams p;
        if (!c.is_auto("model.M")) p.M = static_cast<int>(c.integer("model.M"));
        if (!c.is_auto("model.L")) p.L = c.number("model.L");
        if (!c.is_auto("model.n0")) p.n0 = c.number("model.n0");
        p.J = c.number("model.J");
        p.pot = potential(c, p.pot);
        p.dense = dense_for(c, p.M);
        return bose_hubbard_quench(p);
    }
    if (name == "rydberg_echo") {
        RydbergEchoParams p;
        if (!c.is_auto("model.M")) p.M = static_cast<int>(c.integer("model.M"));
        if (!c.is_auto("model.L")) p.L = c.number("model.L");
        p.N = c.number("model.N");
        p.kappa = c.number("model.kappa");
        p.tau = c.number("model.tau");
        p.mass = c.number("model.mass");
        p.Ne_estimate = c.number("model.Ne_estimate");
        p.snapshots = c.numbers("model.snapshots");
        p.pot = potential(c, p.pot);
        p.dense = dense_for(c, p.M);
        return rydberg_echo(p);
    }
    if (name == "custom") {
        if (c.is_auto("model.extents") || c.is_auto("model.lengths"))
            throw ConfigError("custom scenario needs model.extents and model.lengths");
        LatticeSpec lat;
        for (double e : c.numbers("model.extents")) lat.extents.push_back(static_cast<int>(e));
        lat.lengths = c.numbers("model.lengths");
        validate(lat);
        const double J = c.number("model.J"), mass = c.number("model.mass");
        if (J != 0.0 && mass > 0.0) throw ConfigError("custom scenario takes either J or mass");
        const SparseC om = mass > 0.0 ? kinetic_coupling(lat, mass)
                                      : (J != 0.0 ? tunneling_coupling(lat, J) : SparseC(lat.sites(), lat.sites()));
        InteractionPotential pot = potential(c, InteractionPotential{-32.0, 1.0, 2.0, 3.0});
        const double n0 = c.is_auto("model.n0") ? 1.0 : c.number("model.n0");
        if (!(n0 >= 0.0)) throw ConfigError("model.n0 must be nonnegative");
        Scenario s;
        s.model = build_model(lat, pot, om, dense_for(c, lat.sites()));
        const int M = lat.sites();
        s.phi = VectorXcd::Constant(M, std::sqrt(n0));
        s.n_analysis = VectorXcd::Constant(M, n0);
        s.observables = {mean_field_observable(M), density_observable(M), g1_observable(M, 1)};
        s.t_opt = 0.05;
        s.t_end = 0.1;
        s.t_gauge = s.t_opt;
        return s;
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

ResolvedRun resolve(const RunConfig& c) {
    ResolvedRun r;
    r.scenario = c.get("scenario.name");
    r.sc = build_scenario(c);
    const ModelSpec& m = r.sc.model;
    r.method = parse_method(c.get("method.method"));
    r.t_opt = c.is_auto("method.t_opt") ? r.sc.t_opt : c.number("method.t_opt");
    r.t_fin = c.is_auto("run.t_fin") ? r.sc.t_end : c.number("run.t_fin");
    if (!(r.t_fin > 0.0)) throw ConfigError("run.t_fin must be positive");
    if (!(r.t_opt > 0.0)) throw ConfigError("method.t_opt must be positive");

    const int M = m.sites();
    std::string gauge = c.get("method.gauge");
    if (gauge.empty() || gauge == "auto") gauge = r.scenario == "rydberg_echo" ? "adaptive" : "global";
    auto integrals = [&] { return gauge_integrals(m, r.sc.n_analysis); };
    switch (r.method) {
        case Method::positiveP:
            r.gauge = GaugeConfig::positive_p();
            break;
        case Method::diffusionOnly: {
            const double a = c.is_auto("method.a") ? a_opt_diffusion_only(integrals(), r.t_opt) : c.number("method.a");
            r.gauge = GaugeConfig::diffusion_only(a);
            break;
        }
        case Method::gaugeP:
            if (gauge == "global") {
                const double a = c.is_auto("method.a") ? a_approx(integrals(), r.t_opt) : c.number("method.a");
                r.gauge = GaugeConfig::gauge_p(a);
            } else if (gauge == "adaptive") {
                const double tf = c.is_auto("method.gauge_t_fin") ? r.sc.t_gauge : c.number("method.gauge_t_fin");
                r.gauge = GaugeConfig::adaptive(tf);
            } else if (gauge == "nonlocal") {
                r.gauge = GaugeConfig::nonlocal(nonlocal_A(m, r.sc.n_analysis.real(), r.t_opt), true);
            } else if (gauge == "none") {
                r.gauge = GaugeConfig::gauge_p(0.0);
            } else {
                throw ConfigError("unknown gauge '" + gauge + "'");
            }
            break;
    }
    validate(r.gauge, M);

    r.stepper.dt = c.is_auto("stepper.dt") ? r.sc.dt : c.number("stepper.dt");
    r.stepper.scheme = parse_scheme(c.get("stepper.scheme"));
    r.stepper.midpoint_iters = static_cast<int>(c.integer("stepper.midpoint_iters"));
    r.stepper.max_field = c.number("stepper.max_field");
    validate(r.stepper);

    r.options.engine = parse_engine(c.get("stepper.engine"));
    r.options.threads = static_cast<int>(c.integer("run.threads"));
    r.options.batches = static_cast<int>(c.integer("run.batches"));
    r.options.halt_on_variance = c.flag("run.halt");
    r.options.halt_V = c.number("run.halt_V");
    r.options.phi = r.sc.phi;
    if (r.options.threads < 1) throw ConfigError("run.threads must be at least 1");
    if (r.options.batches < 2) throw ConfigError("run.batches must be at least 2");

    const long nt = c.is_auto("run.trajectories") ? r.sc.n_traj : c.integer("run.trajectories");
    if (nt < 2 || nt > 100000000) throw ConfigError("run.trajectories out of range");
    r.n_traj = static_cast<int>(nt);
    const long seed = c.integer("run.seed");
    if (seed < 0) throw ConfigError("run.seed must be nonnegative");
    r.seed = static_cast<std::uint64_t>(seed);

    const double h = c.number("run.t_step");
    if (!(h > 0.0)) throw ConfigError("run.t_step must be positive");
    const long n = std::lround(r.t_fin / h);
    for (long i = 1; i <= n; ++i) r.grid.push_back(i * h);
    if (r.grid.empty() || std::abs(r.grid.back() - r.t_fin) > 1e-12) r.grid.push_back(r.t_fin);
    for (const auto& o : r.sc.observables)
        for (double t : o.only_at)
            if (t <= r.t_fin) r.grid.push_back(t);
    std::sort(r.grid.begin(), r.grid.end());
    std::vector<double> g;
    for (double t : r.grid)
        if (g.empty() || t - g.back() > 1e-9) g.push_back(t);
    // snap to the step grid so only_at matches the recorded time
    for (double& t : g) t = std::lround(t / r.stepper.dt) * r.stepper.dt;
    r.grid = g;
    for (auto& o : r.sc.observables)
        for (double& t : o.only_at) t = std::lround(t / r.stepper.dt) * r.stepper.dt;
    return r;
}

}  // namespace gaugep::cli
