#include <cmath>
#include <random>

#include "doctest.h"
#include "gaugep/phasespace.hpp"
#include "helpers.hpp"

using namespace gaugep;

namespace {

Ensemble random_ensemble(int N, int K, unsigned seed, bool weighted) {
    std::mt19937 gen(seed);
    std::normal_distribution<> nd;
    Ensemble e;
    for (int j = 0; j < N; ++j) {
        auto s = testing::random_state(K, seed * 1000 + j, 0.4);
        if (weighted) s.logOmega = cplx(0.3 * nd(gen), 0.5 * nd(gen));
        e.trajectories.push_back(s);
    }
    return e;
}

// plain weighted estimate of <a+_c a_a>
cplx hand_estimate(const Ensemble& e, int c, int a) {
    cplx num = 0.0;
    double den = 0.0;
    for (const auto& s : e.trajectories) {
        const cplx w = std::exp(s.logOmega);
        num += w * s.beta[c] * s.alpha[a] + std::conj(w * s.alpha[c] * s.beta[a]);
        den += 2.0 * w.real();
    }
    return num / den;
}

}  // namespace

TEST_SUITE("phasespace") {

TEST_CASE("coherent initial state") {
    VectorXcd phi(2);
    phi << cplx(1, 2), cplx(0.5, -1);
    const auto s = init_coherent(phi);
    CHECK(s.beta[0] == cplx(1, -2));
    CHECK(std::abs(s.occupation(1) - std::norm(phi[1])) < 1e-14);
    CHECK(s.logOmega == cplx(0.0));
}

TEST_CASE("weighted moment estimate matches the hand sum") {
    const auto e = random_ensemble(300, 3, 7, true);
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a) {
            const auto est = estimate(e, ProductSpec{{c}, {a}});
            const cplx h = hand_estimate(e, c, a);
            CHECK(std::abs(est.mean - h) < 1e-12 * std::abs(h) + 1e-14);
        }
    // hermitian products come out as conjugate pairs
    const auto x = estimate(e, ProductSpec{{0}, {1}}), y = estimate(e, ProductSpec{{1}, {0}});
    CHECK(std::abs(x.mean - std::conj(y.mean)) < 1e-12);
    const auto d = estimate(e, ProductSpec{{2}, {2}});
    CHECK(std::abs(d.mean.imag()) < 1e-14);
}

TEST_CASE("jackknife of a linear mean equals the standard error") {
    const auto e = random_ensemble(200, 2, 3, false);
    const auto est = estimate(e, ProductSpec{{}, {0}}, 200);
    std::vector<cplx> v;
    for (const auto& s : e.trajectories) v.push_back(0.5 * (s.alpha[0] + std::conj(s.beta[0])));
    cplx mean = 0.0;
    for (auto& x : v) mean += x;
    mean /= double(v.size());
    double var = 0.0;
    for (auto& x : v) var += std::norm(x - mean);
    var /= v.size() - 1.0;
    CHECK(std::abs(est.mean - mean) < 1e-12);
    CHECK(est.stderr_ == doctest::Approx(std::sqrt(var / v.size())).epsilon(1e-10));
    CHECK(est.n_traj == 200);
}

TEST_CASE("jackknife of the whole ratio against a hand-coded delete-one") {
    const auto e = random_ensemble(40, 2, 5, true);
    const auto obs = g1_observable(2, 1);
    const auto est = estimate(e, obs, 40);
    std::vector<cplx> loo;
    for (int k = 0; k < 40; ++k) {
        Ensemble r;
        for (int j = 0; j < 40; ++j)
            if (j != k) r.trajectories.push_back(e.trajectories[j]);
        cplx g = 0.0;
        for (int n = 0; n < 2; ++n)
            g += hand_estimate(r, n, (n + 1) % 2) /
                 std::sqrt(hand_estimate(r, n, n).real() * hand_estimate(r, (n + 1) % 2, (n + 1) % 2).real());
        loo.push_back(g / 2.0);
    }
    cplx avg = 0.0;
    for (auto& x : loo) avg += x;
    avg /= 40.0;
    double var = 0.0;
    for (auto& x : loo) var += std::norm(x - avg);
    CHECK(est.stderr_ == doctest::Approx(std::sqrt(var * 39.0 / 40.0)).epsilon(1e-9));
}

TEST_CASE("estimates are invariant under alpha <-> beta* with conjugate weight") {
    auto e = random_ensemble(100, 3, 9, true);
    Ensemble f = e;
    for (auto& s : f.trajectories) {
        const VectorXcd a = s.alpha;
        s.alpha = s.beta.conjugate();
        s.beta = a.conjugate();
        s.logOmega = std::conj(s.logOmega);
    }
    for (const auto& obs : {g1_observable(3, 1), density_observable(3), g2_observable(3, 0)}) {
        const auto x = estimate(e, obs), y = estimate(f, obs);
        CHECK(std::abs(x.mean - y.mean) < 1e-12);
    }
}

TEST_CASE("coherent ensemble has unit coherences") {
    VectorXcd phi = VectorXcd::Constant(4, cplx(1.1, 0.3));
    Ensemble e;
    for (int j = 0; j < 10; ++j) e.trajectories.push_back(init_coherent(phi));
    CHECK(g1(e, 4, 1).mean.real() == doctest::Approx(1.0));
    CHECK(g2(e, 4, 0, 0).mean.real() == doctest::Approx(1.0));
    CHECK(estimate(e, total_number_observable(4)).mean.real() == doctest::Approx(4 * std::norm(phi[0])));
    CHECK(estimate(e, mean_field_observable(4)).mean.real() == doctest::Approx(1.1));
    CHECK(empirical_V(e, 4) == doctest::Approx(0.0));
}

TEST_CASE("characteristic variance matches a hand computation") {
    const auto e = random_ensemble(50, 2, 11, true);
    double tot = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        std::vector<double> x;
        for (const auto& s : e.trajectories) {
            const cplx g = mu < 2 ? s.alpha[mu] : s.beta[mu - 2];
            x.push_back(s.logOmega.real() + std::log(std::abs(g)));
        }
        double m = 0.0;
        for (double v : x) m += v;
        m /= x.size();
        double var = 0.0;
        for (double v : x) var += (v - m) * (v - m);
        tot += var / (x.size() - 1.0);
    }
    CHECK(empirical_V(e, 2) == doctest::Approx(tot / 4.0).epsilon(1e-12));

    // merging accumulators gives the same value
    LogVarianceAccumulator a(2, 2), b(2, 2), c(2, 2);
    for (int j = 0; j < 50; ++j) (j < 17 ? a : b).add(e.trajectories[j]);
    c.merge(a);
    c.merge(b);
    CHECK(c.value() == doctest::Approx(tot / 4.0).epsilon(1e-12));
}

TEST_CASE("zero amplitudes are excluded from the variance") {
    Ensemble e;
    VectorXcd phi(2);
    phi << 0.0, 1.0;
    for (int j = 0; j < 5; ++j) e.trajectories.push_back(init_coherent(phi));
    long z = 0;
    empirical_V(e, 2, &z);
    CHECK(z == 10);
}

TEST_CASE("degenerate estimates") {
    Ensemble empty;
    CHECK_THROWS_AS(estimate(empty, ProductSpec{{}, {0}}), DegenerateEstimate);
    Ensemble e;
    auto s = testing::random_state(1, 1);
    s.logOmega = cplx(0.0, 0.5 * M_PI);  // purely imaginary weight
    e.trajectories = {s, s};
    CHECK_THROWS_AS(estimate(e, ProductSpec{{}, {0}}), DegenerateEstimate);
    auto d = s;
    d.diverged = true;
    e.trajectories = {d, d};
    CHECK_THROWS_AS(estimate(e, ProductSpec{{}, {0}}), DegenerateEstimate);
}

}
