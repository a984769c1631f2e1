#include "gaugep/scenarios.hpp"

#include <cmath>

namespace gaugep {

VectorXd line_positions(const LatticeSpec& lat) {
    const int M = lat.extents[0];
    const double dx = lat.spacing(0);
    VectorXd x(M);
    for (int i = 0; i < M; ++i) x[i] = -0.5 * lat.lengths[0] + dx * i;
    return x;
}

Scenario bose_hubbard_quench(const BhQuenchParams& p) {
    if (p.M < 1 || !(p.L > 0.0) || !(p.n0 >= 0.0) || !std::isfinite(p.J))
        throw ConfigError("invalid quench parameters");
    Scenario s;
    const auto lat = LatticeSpec::line(p.M, 2.0 * p.L);
    const SparseC om = p.J != 0.0 ? tunneling_coupling(lat, p.J) : SparseC(p.M, p.M);
    s.model = build_model(lat, p.pot, om, p.dense);
    s.phi = VectorXcd::Constant(p.M, std::sqrt(p.n0));
    s.n_analysis = VectorXcd::Constant(p.M, p.n0);
    s.observables.push_back(mean_field_observable(p.M));
    s.observables.push_back(density_observable(p.M));
    for (int dn = 1; dn <= p.M / 2; ++dn) s.observables.push_back(g1_observable(p.M, dn));
    s.t_opt = 0.05;
    s.t_end = 0.3;
    s.t_gauge = s.t_opt;
    s.n_traj = 100000;
    return s;
}

Scenario rydberg_echo(const RydbergEchoParams& p) {
    if (p.M < 1 || !(p.L > 0.0) || !(p.N >= 0.0) || !(p.tau > 0.0) || !std::isfinite(p.kappa))
        throw ConfigError("invalid echo parameters");
    Scenario s;
    const auto lat = LatticeSpec::line(p.M, 2.0 * p.L);
    const SparseC om = p.mass > 0.0 ? kinetic_coupling(lat, p.mass) : SparseC(p.M, p.M);
    s.model = build_two_component_model(lat, p.pot, om, p.kappa, 0.5 * p.tau, p.dense);
    s.phi = VectorXcd::Zero(2 * p.M);
    s.phi.tail(p.M).setConstant(std::sqrt(p.N / p.M));
    s.n_analysis = VectorXcd::Constant(p.M, p.Ne_estimate / p.M);

    Observable ne = total_number_observable(p.M);
    ne.name = "N_e";
    Observable ng = total_number_observable(p.M, p.M);
    ng.name = "N_g";
    s.observables.push_back(ne);
    s.observables.push_back(ng);
    s.observables.push_back(g2_observable(p.M, 0));
    for (int r = 1; r <= p.M / 2; ++r) s.observables.push_back(g2_observable(p.M, r, 0, p.snapshots));
    s.t_opt = 0.135;
    s.t_end = 0.3;
    s.t_gauge = p.tau;
    s.n_traj = 2000;
    s.dt = 5e-4;
    return s;
}

}  // namespace gaugep
