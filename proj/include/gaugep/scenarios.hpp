#pragma once

#include <vector>

#include "gaugep/gauges.hpp"
#include "gaugep/model.hpp"
#include "gaugep/phasespace.hpp"

namespace gaugep {

// Box is [-L, L]; every site holds n0 quanta initially.
struct BhQuenchParams {
    int M = 6;
    double L = 2.0;
    double J = 0.0;
    double n0 = 1.2;
    InteractionPotential pot{-32.0, 1.0, 2.0, 3.0};
    bool dense = true;
};

// Ground state g filled with N atoms, excitation e empty. mass <= 0: frozen gas.
struct RydbergEchoParams {
    int M = 64;
    double L = 50.0;
    double N = 500.0;
    double tau = 0.18;
    double kappa = 3.0;
    double mass = 0.0;
    InteractionPotential pot{-5.96e7, 12.5, 2.0, 3.0};
    double Ne_estimate = 8.0;  // excited atoms assumed by the variance analysis
    std::vector<double> snapshots{0.08, 0.12};
    bool dense = true;
};

struct Scenario {
    ModelSpec model;
    VectorXcd phi;                     // all modes
    VectorXcd n_analysis;              // interacting-field occupations for the analytics
    std::vector<Observable> observables;
    double t_opt = 0.0;                // gauge optimisation time
    double t_end = 0.0;                // natural final time
    double t_gauge = 0.0;              // final time handed to the adaptive gauge
    int n_traj = 1000;
    double dt = 1e-4;
};

Scenario bose_hubbard_quench(const BhQuenchParams& p);
Scenario rydberg_echo(const RydbergEchoParams& p);

// Positions x_mu = -L + mu * dx of a line lattice on [-L, L].
VectorXd line_positions(const LatticeSpec& lat);

}  // namespace gaugep
