#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "gaugep/sde.hpp"

namespace testing {

using namespace gaugep;

inline ModelSpec small_model(int M = 4, double C6 = -5.0, double box = 3.0, double J = 0.0) {
    const auto lat = LatticeSpec::line(M, box);
    const SparseC om = J != 0.0 ? tunneling_coupling(lat, J) : SparseC(M, M);
    return build_model(lat, InteractionPotential{C6, 1.0, 2.0, 3.0}, om, true);
}

inline TrajectoryState random_state(int K, unsigned seed, double spread = 0.3) {
    std::mt19937 gen(seed);
    std::normal_distribution<> nd;
    TrajectoryState s;
    s.alpha.resize(K);
    s.beta.resize(K);
    for (int i = 0; i < K; ++i) {
        s.alpha[i] = cplx(1.0 + spread * nd(gen), spread * nd(gen));
        s.beta[i] = cplx(1.0 + spread * nd(gen), spread * nd(gen));
    }
    return s;
}

inline MatrixXd random_symmetric(int M, unsigned seed, double scale) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<> u(-1.0, 1.0);
    MatrixXd A(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = scale * u(gen);
    return A;
}

// stacked (alpha, beta, logOmega)
inline VectorXcd flat(const Rates& r) {
    VectorXcd v(r.dalpha.size() + r.dbeta.size() + 1);
    v << r.dalpha, r.dbeta, r.dlogOmega;
    return v;
}

// noise matrix columns B_{., nu}
inline std::vector<VectorXcd> noise_columns(const TrajectoryState& s, const ModelSpec& m, const GaugeConfig& g,
                                            double t) {
    const int N = noise_count(m);
    std::vector<VectorXcd> c;
    for (int nu = 0; nu < N; ++nu) {
        VectorXd e = VectorXd::Zero(N);
        e[nu] = 1.0;
        c.push_back(flat(apply_noise(s, m, g, e, t)));
    }
    return c;
}

// -1/2 sum_nu sum_k [B_k d_k B_mu + B*_k d*_k B_mu] by central differences
inline VectorXcd wirtinger_correction(const TrajectoryState& s, const ModelSpec& m, const GaugeConfig& g,
                                      double t, double h = 1e-5) {
    const int K = s.modes();
    const auto B = noise_columns(s, m, g, t);
    auto shifted = [&](int k, cplx d) {
        TrajectoryState q = s;
        if (k < K)
            q.alpha[k] += d;
        else
            q.beta[k - K] += d;
        return noise_columns(q, m, g, t);
    };
    VectorXcd S = VectorXcd::Zero(2 * K + 1);
    for (int k = 0; k < 2 * K; ++k) {
        const auto px = shifted(k, h), mx = shifted(k, -h);
        const auto py = shifted(k, cplx(0, h)), my = shifted(k, cplx(0, -h));
        for (std::size_t nu = 0; nu < B.size(); ++nu) {
            const VectorXcd dx = (px[nu] - mx[nu]) / (2 * h), dy = (py[nu] - my[nu]) / (2 * h);
            const VectorXcd d = 0.5 * (dx - I * dy), dc = 0.5 * (dx + I * dy);
            S += -0.5 * (B[nu][k] * d + std::conj(B[nu][k]) * dc);
        }
    }
    return S;
}

inline double rel_err(const VectorXcd& a, const VectorXcd& b) {
    return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace testing
