#include "gaugep/spectral.hpp"

#include <cmath>

namespace gaugep {

int negate_index(const LatticeSpec& lat, int k) {
    auto c = lat.coords(k);
    for (int d = 0; d < lat.dims(); ++d) c[d] = -c[d];
    return lat.index(c);
}

KSpacePartition build_partition(const LatticeSpec& lat) {
    validate(lat);
    KSpacePartition p;
    const int M = lat.sites();
    for (int k = 0; k < M; ++k) {
        const int nk = negate_index(lat, k);
        if (nk == k) {
            p.R0.push_back(k);
            continue;
        }
        // half-space rule: the first axis on which k and -k differ decides
        const auto c = lat.coords(k);
        for (int d = 0; d < lat.dims(); ++d) {
            const int e = lat.extents[d];
            if (c[d] == (e - c[d]) % e) continue;
            const int signed_k = c[d] < (e + 1) / 2 ? c[d] : c[d] - e;
            if (signed_k > 0) {
                p.R.push_back(k);
                p.Rp.push_back(nk);
            }
            break;
        }
    }
    return p;
}

void chi_from_normals(const KSpacePartition& part, const double* z, double dt, VectorXcd& chi) {
    const double sc = 1.0 / std::sqrt(dt);
    const double h = sc * 0.70710678118654752440;
    const std::size_t nr = part.R.size();
    for (std::size_t i = 0; i < nr; ++i) {
        const cplx v(h * z[2 * i], h * z[2 * i + 1]);
        chi[part.R[i]] = v;
        chi[part.Rp[i]] = std::conj(v);
    }
    for (std::size_t j = 0; j < part.R0.size(); ++j) chi[part.R0[j]] = sc * z[2 * nr + j];
}

VectorXcd draw_chi(const KSpacePartition& part, const double* z, double dt) {
    VectorXcd chi(part.size());
    chi_from_normals(part, z, dt, chi);
    return chi;
}

VectorXcd principal_sqrt(const VectorXd& w_tilde) {
    VectorXcd s(w_tilde.size());
    for (Eigen::Index k = 0; k < w_tilde.size(); ++k)
        s[k] = w_tilde[k] >= 0.0 ? cplx(std::sqrt(w_tilde[k]), 0.0) : cplx(0.0, std::sqrt(-w_tilde[k]));
    return s;
}

void spectral_drift(const VectorXcd& n, const VectorXd& w_tilde, const LatticeSpec& lat, Fft& fft, VectorXcd& out) {
    const int M = fft.size();
    cplx* d = fft.data();
    for (int k = 0; k < M; ++k) d[k] = n[k];
    fft.forward();
    const double norm = 1.0 / (M * lat.cell_volume());
    for (int k = 0; k < M; ++k) d[k] *= w_tilde[k] * norm;
    fft.backward();
    out.resize(M);
    for (int k = 0; k < M; ++k) out[k] = d[k];
}

VectorXcd spectral_drift(const VectorXcd& n, const VectorXd& w_tilde, const LatticeSpec& lat) {
    Fft fft(lat.extents);
    VectorXcd out;
    spectral_drift(n, w_tilde, lat, fft, out);
    return out;
}

VectorXcd spectral_noise(const VectorXcd& alpha, const VectorXd& w_tilde, const VectorXcd& chi,
                         const LatticeSpec& lat) {
    const int M = lat.sites();
    Fft fft(lat.extents);
    const VectorXcd sw = principal_sqrt(w_tilde);
    for (int k = 0; k < M; ++k) fft.data()[k] = chi[k] * sw[k];
    fft.backward();
    const cplx pre = std::conj(SQRT_I) / std::sqrt(lat.volume());
    VectorXcd x(M);
    for (int k = 0; k < M; ++k) x[k] = pre * alpha[k] * fft.data()[k];
    return x;
}

SpectralKernel::SpectralKernel(const ModelSpec& model, const GaugeConfig& gauge)
    : Kernel(model, gauge), part_(build_partition(model.lattice)), fft_(model.lattice.extents) {
    if (gauge.weighted() || (gauge.diffusion != DiffusionGauge::none && gauge.diffusion != DiffusionGauge::global))
        throw ConfigError("spectral engine supports positive-P and the global diffusion gauge only");
    sqrt_wt_ = principal_sqrt(model.w_tilde);
    chi_ = VectorXcd::Zero(M_);
}

void SpectralKernel::interaction_field(const VectorXcd& n, VectorXcd& out) {
    spectral_drift(n, model_.w_tilde, model_.lattice, fft_, out);
}

void SpectralKernel::sqrtW_apply(const double* xi1, const double* xi2, VectorXcd& y1, VectorXcd& y2) {
    const double pre = 1.0 / std::sqrt(model_.lattice.volume());
    cplx* d = fft_.data();
    for (int pass = 0; pass < 2; ++pass) {
        chi_from_normals(part_, pass == 0 ? xi1 : xi2, 1.0, chi_);
        for (int k = 0; k < M_; ++k) d[k] = chi_[k] * sqrt_wt_[k];
        fft_.backward();
        VectorXcd& y = pass == 0 ? y1 : y2;
        for (int k = 0; k < M_; ++k) y[k] = pre * d[k];
    }
}

TrajectoryState step_large(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge,
                           const StepperConfig& st, const VectorXd& xi) {
    validate(st);
    if (xi.size() != noise_count(model)) throw ConfigError("noise vector has the wrong length");
    SpectralKernel k(model, gauge);
    TrajectoryState out = s;
    k.advance(out, st, xi.data(), s.t);
    return out;
}

}  // namespace gaugep
