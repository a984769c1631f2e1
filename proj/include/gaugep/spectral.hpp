#pragma once

#include <memory>
#include <vector>

#include "gaugep/fft.hpp"
#include "gaugep/model.hpp"
#include "gaugep/sde.hpp"

namespace gaugep {

// Flat DFT indices. R and Rp are paired entry by entry (Rp[i] = -R[i]).
struct KSpacePartition {
    std::vector<int> R, Rp, R0;
    int size() const { return static_cast<int>(R.size() * 2 + R0.size()); }
};

KSpacePartition build_partition(const LatticeSpec& lat);
int negate_index(const LatticeSpec& lat, int k);

// Fills chi from standard normals z (M of them). Entries have <chi_p chi_q> = delta_{p,-q}/dt.
void chi_from_normals(const KSpacePartition& part, const double* z, double dt, VectorXcd& chi);
VectorXcd draw_chi(const KSpacePartition& part, const double* z, double dt);

VectorXcd spectral_drift(const VectorXcd& n, const VectorXd& w_tilde, const LatticeSpec& lat);
void spectral_drift(const VectorXcd& n, const VectorXd& w_tilde, const LatticeSpec& lat, Fft& fft, VectorXcd& out);

// Full alpha noise rate sqrt(-i/V) alpha_n sum_p chi_p sqrt(Wtilde_p) e^{i k_p x_n}
VectorXcd spectral_noise(const VectorXcd& alpha, const VectorXd& w_tilde, const VectorXcd& chi,
                         const LatticeSpec& lat);

VectorXcd principal_sqrt(const VectorXd& w_tilde);

class SpectralKernel final : public Kernel {
public:
    SpectralKernel(const ModelSpec& model, const GaugeConfig& gauge);

protected:
    void interaction_field(const VectorXcd& n, VectorXcd& out) override;
    void sqrtW_apply(const double* xi1, const double* xi2, VectorXcd& y1, VectorXcd& y2) override;
    bool supports_matrix_gauge() const override { return false; }

private:
    KSpacePartition part_;
    VectorXcd sqrt_wt_, chi_;
    Fft fft_;
};

// xi: 2M standard-normal-derived noises with variance 1/dt, as for the direct step
TrajectoryState step_large(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge,
                           const StepperConfig& st, const VectorXd& xi);

}  // namespace gaugep
