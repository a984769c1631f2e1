#pragma once

#include <array>
#include <limits>
#include <vector>

#include "gaugep/common.hpp"

namespace gaugep {

struct LatticeSpec {
    std::vector<int> extents;     // 1..3 entries, site index is row-major
    std::vector<double> lengths;  // periodic box length per dimension
    bool periodic = true;

    static LatticeSpec line(int sites, double box_length);

    int dims() const { return static_cast<int>(extents.size()); }
    int sites() const;
    double spacing(int d) const { return lengths[d] / extents[d]; }
    double cell_volume() const;
    double volume() const { return sites() * cell_volume(); }
    std::array<int, 3> coords(int site) const;
    int index(const std::array<int, 3>& c) const;
    double distance(int n, int m) const;  // minimum image
};

void validate(const LatticeSpec& lat);

// W(r) = -C6 / (r^a + eps^a)^b
struct InteractionPotential {
    double C6 = 0.0;
    double eps = 1.0;
    double a_exp = 2.0;
    double b_exp = 3.0;

    double operator()(double r) const;
};

struct ModelSpec {
    LatticeSpec lattice;
    int components = 1;  // 2: interacting field e followed by a linear field g

    // Linear couplings over all components*M modes. omega_flip is multiplied
    // by +1 for t < t_flip and by -1 afterwards (Rabi drive with echo).
    SparseC omega;
    SparseC omega_flip;
    double t_flip = std::numeric_limits<double>::infinity();

    VectorXd w_row;    // W_{q0}
    VectorXd w_tilde;  // dV * DFT(w_row)
    double W0 = 0.0;
    double U0 = 0.0;

    bool dense = false;
    MatrixXd W;
    MatrixXcd sqrtW;
    MatrixXd U;

    int sites() const { return lattice.sites(); }
    int modes() const { return components * lattice.sites(); }
    bool interacting() const { return w_row.size() > 0 && w_row.cwiseAbs().maxCoeff() > 0.0; }
    bool has_linear() const { return omega.nonZeros() > 0 || omega_flip.nonZeros() > 0; }
    double flip_sign(double t) const { return t < t_flip ? 1.0 : -1.0; }
    MatrixXcd omega_dense(double t = 0.0) const;
};

MatrixXd build_potential_matrix(const LatticeSpec& lat, const InteractionPotential& pot);
VectorXd potential_row(const LatticeSpec& lat, const InteractionPotential& pot);
MatrixXd circulant_from_row(const LatticeSpec& lat, const VectorXd& row);

MatrixXcd symmetric_sqrt(const MatrixXd& W);
MatrixXd rectified_U(const MatrixXcd& sqrtW);
VectorXd potential_spectrum(const VectorXd& w_row, const LatticeSpec& lat);

SparseC tunneling_coupling(const LatticeSpec& lat, double J);
SparseC kinetic_coupling(const LatticeSpec& lat, double mass);

// Dense matrices (W, sqrtW, U) are built only when dense == true.
ModelSpec build_model(const LatticeSpec& lat, const VectorXd& w_row, const SparseC& omega,
                      bool dense = true);
ModelSpec build_model(const LatticeSpec& lat, const InteractionPotential& pot,
                      const SparseC& omega, bool dense = true);

// Interacting field e and ground field g, coupled by kappa/2 per site, drive
// sign reversed at t_flip.
ModelSpec build_two_component_model(const LatticeSpec& lat, const InteractionPotential& pot,
                                    const SparseC& omega_single, double kappa, double t_flip,
                                    bool dense = true);

}  // namespace gaugep
