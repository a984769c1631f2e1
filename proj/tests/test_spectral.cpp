#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "gaugep/spectral.hpp"
#include "helpers.hpp"

using namespace gaugep;

namespace {

LatticeSpec grid(std::vector<int> e, std::vector<double> l) {
    LatticeSpec lat;
    lat.extents = std::move(e);
    lat.lengths = std::move(l);
    return lat;
}

VectorXcd random_n(int M, unsigned seed) {
    const auto s = testing::random_state(M, seed, 0.5);
    return s.alpha.cwiseProduct(s.beta);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("k-space partition covers every index once") {
    for (const auto& lat : {LatticeSpec::line(7, 1.0), LatticeSpec::line(8, 1.0), grid({4, 6}, {1, 1}),
                            grid({5, 4}, {1, 1}), grid({4, 3, 2}, {1, 1, 1}), grid({3, 3, 3}, {1, 1, 1})}) {
        const auto p = build_partition(lat);
        CHECK(p.size() == lat.sites());
        std::set<int> seen;
        for (int k : p.R) seen.insert(k);
        for (int k : p.Rp) seen.insert(k);
        for (int k : p.R0) seen.insert(k);
        CHECK(int(seen.size()) == lat.sites());
        for (std::size_t i = 0; i < p.R.size(); ++i) CHECK(p.Rp[i] == negate_index(lat, p.R[i]));
        for (int k : p.R0) CHECK(negate_index(lat, k) == k);
    }
    // self-conjugate modes: 1 for odd lines, 2 for even, 2^d on even grids
    CHECK(build_partition(LatticeSpec::line(7, 1.0)).R0.size() == 1);
    CHECK(build_partition(LatticeSpec::line(8, 1.0)).R0.size() == 2);
    CHECK(build_partition(grid({4, 6}, {1, 1})).R0.size() == 4);
    CHECK(build_partition(grid({4, 4, 2}, {1, 1, 1})).R0.size() == 8);
}

TEST_CASE("chi is conjugate symmetric with the right variance") {
    const auto lat = grid({4, 5}, {1, 1});
    const auto p = build_partition(lat);
    VectorXd z = VectorXd::Random(lat.sites());
    const VectorXcd chi = draw_chi(p, z.data(), 0.25);
    for (int k = 0; k < lat.sites(); ++k) CHECK(std::abs(chi[negate_index(lat, k)] - std::conj(chi[k])) < 1e-15);
    for (int k : p.R0) CHECK(chi[k].imag() == 0.0);
    // |chi_R|^2 = (z1^2 + z2^2) / (2 dt)
    CHECK(std::norm(chi[p.R[0]]) == doctest::Approx((z[0] * z[0] + z[1] * z[1]) / 0.5));
}

TEST_CASE("spectral drift equals direct summation") {
    std::vector<LatticeSpec> lats{LatticeSpec::line(4, 3.0), LatticeSpec::line(16, 10.0), LatticeSpec::line(64, 100.0),
                                  grid({16, 16}, {20.0, 20.0})};
    for (const auto& lat : lats) {
        const auto m = build_model(lat, InteractionPotential{-5.0, 1.0, 2.0, 3.0}, SparseC(lat.sites(), lat.sites()), true);
        const VectorXcd n = random_n(lat.sites(), 4);
        const VectorXcd d = spectral_drift(n, m.w_tilde, lat);
        const VectorXcd e = m.W.cast<cplx>() * n;
        CHECK((d - e).norm() < 1e-10 * e.norm());
    }
}

TEST_CASE("spectral noise covariance is exact column by column") {
    const auto lat = grid({4, 4}, {6.0, 6.0});
    const auto m = build_model(lat, InteractionPotential{-5.0, 1.0, 2.0, 3.0}, SparseC(16, 16), true);
    const auto s = testing::random_state(16, 9);
    for (const auto& g : {GaugeConfig::positive_p(), GaugeConfig::diffusion_only(0.6)}) {
        SpectralKernel k(m, g);
        MatrixXcd Daa = MatrixXcd::Zero(16, 16), Dab = Daa;
        for (int nu = 0; nu < 32; ++nu) {
            VectorXd e = VectorXd::Zero(32);
            e[nu] = 1.0;
            Rates r;
            r.dalpha = r.dbeta = VectorXcd::Zero(16);
            k.set_noise(e.data());
            k.add_noise(s, 0.0, r);
            Daa += r.dalpha * r.dalpha.transpose();
            Dab += r.dalpha * r.dbeta.transpose();
        }
        const MatrixXcd ex = -I * m.W.cast<cplx>().cwiseProduct(s.alpha * s.alpha.transpose());
        CHECK((Daa - ex).norm() < 1e-10 * ex.norm());
        CHECK(Dab.norm() < 1e-10 * ex.norm());
    }
}

TEST_CASE("spectral_noise helper matches the same structure") {
    const auto lat = LatticeSpec::line(6, 4.0);
    const auto m = build_model(lat, InteractionPotential{-5.0, 1.0, 2.0, 3.0}, SparseC(6, 6), true);
    const auto p = build_partition(lat);
    const auto s = testing::random_state(6, 1);
    MatrixXcd D = MatrixXcd::Zero(6, 6);
    for (int nu = 0; nu < 6; ++nu) {
        VectorXd e = VectorXd::Zero(6);
        e[nu] = 1.0;
        const VectorXcd x = spectral_noise(s.alpha, m.w_tilde, draw_chi(p, e.data(), 1.0), lat);
        D += x * x.transpose();
    }
    const MatrixXcd ex = -I * m.W.cast<cplx>().cwiseProduct(s.alpha * s.alpha.transpose());
    CHECK((D - ex).norm() < 1e-10 * ex.norm());
}

TEST_CASE("spectral kernel rejects weighted and matrix gauges") {
    const auto m = testing::small_model(4);
    CHECK_THROWS_AS(SpectralKernel(m, GaugeConfig::gauge_p(0.5)), ConfigError);
    CHECK_THROWS_AS(SpectralKernel(m, GaugeConfig::adaptive(0.1)), ConfigError);
    CHECK_THROWS_AS(SpectralKernel(m, GaugeConfig::nonlocal(MatrixXd::Zero(4, 4), false)), ConfigError);
    CHECK_NOTHROW(SpectralKernel(m, GaugeConfig::diffusion_only(0.5)));
}

TEST_CASE("noiseless spectral step matches the direct step") {
    const auto m = testing::small_model(8, -5.0, 6.0, 0.7);
    const auto s = testing::random_state(8, 2);
    StepperConfig st;
    st.dt = 1e-3;
    const VectorXd z = VectorXd::Zero(16);
    const auto a = step(s, m, GaugeConfig::positive_p(), st, z);
    const auto b = step_large(s, m, GaugeConfig::positive_p(), st, z);
    CHECK((a.alpha - b.alpha).norm() < 1e-12 * a.alpha.norm());
    CHECK((a.beta - b.beta).norm() < 1e-12 * a.beta.norm());
}

TEST_CASE("spectral engine works without dense matrices") {
    const auto lat = LatticeSpec::line(256, 100.0);
    const auto m = build_model(lat, InteractionPotential{-5.0, 1.0, 2.0, 3.0}, SparseC(256, 256), false);
    RunOptions ro;
    ro.engine = Engine::spectral;
    ro.phi = VectorXcd::Constant(256, 0.5);
    StepperConfig st;
    st.dt = 1e-3;
    const auto r = run_ensemble(m, GaugeConfig::positive_p(), st, 16, 1, {0.01}, {density_observable(256)}, ro);
    const auto& e = r.points[0].estimates[0];
    CHECK(std::abs(e.mean.real() - 0.25) < 4.0 * e.stderr_ + 1e-12);
    ro.engine = Engine::direct;
    CHECK_THROWS_AS(run_ensemble(m, GaugeConfig::positive_p(), st, 8, 1, {0.01}, {density_observable(256)}, ro),
                    ConfigError);
}

}
