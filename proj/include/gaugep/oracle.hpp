#pragma once

#include <map>
#include <vector>

#include "gaugep/model.hpp"
#include "gaugep/phasespace.hpp"

namespace gaugep {

constexpr double kFockTail = 1e-12;

struct FockCutoff {
    int n_max = 0;
};

// Poisson(nbar) probability of more than n_max quanta
double poisson_tail(double nbar, int n_max);
// smallest n_max with tail <= tol for every mode of phi
FockCutoff choose_cutoff(const VectorXcd& phi, double tol = kFockTail);

// J = 0 evolution of a coherent product state. Supports <a_m> and <a+_n a_m>.
// A cutoff of 0 selects one automatically; a too small one is refused.
cplx fock_diagonal_evolve(const ModelSpec& model, const VectorXcd& phi, double t, const ProductSpec& obs,
                          FockCutoff cutoff = {});
// site-averaged normalised first order coherence
double fock_g1(const ModelSpec& model, const VectorXcd& phi, double t, int dn);

// Dense evolution of the truncated state in total-number sectors. The flipped
// coupling of a two-component model is switched at t_flip.
class ExactDiagonalizer {
public:
    static constexpr int kMaxSites = 3;
    static constexpr int kMaxDimension = 4096;

    // n_total_max <= 0: from the Poisson tail of the total number
    ExactDiagonalizer(const ModelSpec& model, const VectorXcd& phi, int n_total_max = 0);

    void evolve_to(double t);
    double time() const { return t_; }
    cplx expect(const ProductSpec& p) const;
    double norm() const;
    double energy() const;  // <H> with the coupling sign at the current time
    int dimension() const { return dim_; }
    int n_total_max() const { return nmax_; }

private:
    struct Sector {
        std::vector<std::vector<int>> basis;
        std::map<std::vector<int>, int> index;
        MatrixXcd H[2];
        MatrixXcd V[2];
        VectorXd E[2];
        VectorXcd psi;
    };
    using State = std::vector<VectorXcd>;

    void build_hamiltonian(Sector& s, int which) const;
    void propagate(double dt, int which);
    State apply_annihilators(const State& psi, const std::vector<int>& modes) const;

    const ModelSpec& model_;
    int K_ = 0, nmax_ = 0, dim_ = 0;
    double t_ = 0.0;
    std::vector<Sector> sec_;
};

cplx exact_diag_small(const ModelSpec& model, const VectorXcd& phi, int n_total_max, double t,
                      const ProductSpec& obs);

}  // namespace gaugep
