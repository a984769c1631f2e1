#include <cmath>

#include "doctest.h"
#include "gaugep/analytics.hpp"
#include "gaugep/scenarios.hpp"
#include "helpers.hpp"

using namespace gaugep;

namespace {

ModelSpec contact(int M, double w) {
    const auto lat = LatticeSpec::line(M, M);
    VectorXd row = VectorXd::Zero(M);
    row[0] = w;
    return build_model(lat, row, SparseC(M, M), true);
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("phi helpers and their series") {
    for (double x : {1.0, -0.5, 3.0}) {
        CHECK(phi2(x).real() == doctest::Approx((std::exp(x) - 1 - x) / (x * x)));
        CHECK(phi3(x).real() == doctest::Approx((std::exp(x) - 1 - x - x * x / 2) / (x * x * x)));
    }
    const cplx z(1.2, -0.7);
    CHECK(std::abs(phi2(z) - (std::exp(z) - 1.0 - z) / (z * z)) < 1e-12);
    CHECK(phi2(1e-9).real() == doctest::Approx(0.5));
    CHECK(phi3(1e-9).real() == doctest::Approx(1.0 / 6));
    CHECK(phi3(0.0).real() == doctest::Approx(1.0 / 6));
    // continuity across the series switch
    CHECK(phi3(1e-3).real() == doctest::Approx(phi3(1.1e-3).real()).epsilon(1e-3));
}

TEST_CASE("positive-P variance is the unit-gauge case of the general formula") {
    const auto m = testing::small_model(4, -5.0, 3.0);
    VectorXcd n(4);
    n << 1.0, 0.7, 1.4, 0.9;
    const auto mom = InitialMoments::deterministic(n);
    for (double t : {0.01, 0.05, 0.2})
        CHECK(V_positiveP(t, m, mom) ==
              doctest::Approx(V_positiveP_general(t, m, MatrixXcd::Identity(8, 8), mom)).epsilon(1e-12));
    CHECK(V_positiveP(0.0, m, mom, {}, {}, 0.3) == doctest::Approx(0.3));
    CHECK(V_gaugeP(0.0, m, global_O(4, 0.5), mom, 0.2) == doctest::Approx(0.2));
    CHECK(V_gaugeP(0.05, m, global_O(4, 0.5), mom, 0.2) ==
          doctest::Approx(V_gaugeP(0.05, m, global_O(4, 0.5), mom) + 0.2));
    const MatrixXd Z = MatrixXd::Zero(4, 4);
    CHECK(V_positiveP(0.05, m, mom, Z, Z) == doctest::Approx(V_positiveP(0.05, m, mom)));
}

TEST_CASE("full formulas approach their small-t expansions") {
    auto sc = bose_hubbard_quench({});
    const auto g = gauge_integrals(sc.model, sc.n_analysis);
    const auto mom = InitialMoments::deterministic(sc.n_analysis);
    for (double t : {1e-4, 5e-4}) {
        const double vp = V_positiveP(t, sc.model, mom), ve = V_positiveP_expanded(t, g);
        CHECK(std::abs(vp - ve) < 0.01 * ve);
        for (double a : {0.3, 0.7}) {
            const double vg = V_gaugeP(t, sc.model, global_O(6, a), mom), ge = V_gaugeP_expanded(t, g, a);
            CHECK(std::abs(vg - ge) < 0.01 * ge);
            const double vd = V_positiveP_general(t, sc.model, global_O(6, a), mom);
            const double de = V_diffusionOnly_expanded(t, g, a);
            CHECK(std::abs(vd - de) < 0.01 * de);
        }
    }
}

TEST_CASE("variance formulas reject non-orthogonal gauges and missing dense matrices") {
    const auto m = testing::small_model(3);
    const auto mom = InitialMoments::deterministic(VectorXcd::Ones(3));
    CHECK_THROWS_AS(V_gaugeP(0.1, m, MatrixXcd::Constant(6, 6, 1.0), mom), ContractViolation);
    CHECK_THROWS_AS(V_gaugeP(0.1, m, MatrixXcd::Identity(4, 4), mom), ContractViolation);
    CHECK_THROWS_AS(V_gaugeP(0.1, m, MatrixXcd::Identity(6, 6), InitialMoments::deterministic(VectorXcd::Ones(2))),
                    ConfigError);
    const auto d = build_model(LatticeSpec::line(3, 3.0), InteractionPotential{-1, 1, 2, 3}, SparseC(3, 3), false);
    CHECK_THROWS_AS(V_positiveP(0.1, d, mom), PreconditionError);
}

TEST_CASE("quench simulation-time table") {
    auto sc = bose_hubbard_quench({});
    const auto g = gauge_integrals(sc.model, sc.n_analysis);
    CHECK(a_approx(g, 0.05) == doctest::Approx(0.70).epsilon(0.015));
    const auto gp = tsim(g, Method::gaugeP);
    CHECK(gp[0].applies);
    CHECK(tsim_best(g, Method::gaugeP) == doctest::Approx(0.14).epsilon(0.03));
    CHECK(tsim_best(g, Method::positiveP) == doctest::Approx(0.07).epsilon(0.03));
}

TEST_CASE("echo simulation-time estimates") {
    auto sc = rydberg_echo({});
    const auto g = gauge_integrals(sc.model, sc.n_analysis);
    CHECK(a_approx(g, 0.135) == doctest::Approx(0.66).epsilon(0.015));
    CHECK(tsim_best(g, Method::gaugeP) > tsim_best(g, Method::positiveP));
}

TEST_CASE("no interactions: unbounded simulation time and no NaNs") {
    auto m = testing::small_model(4, 0.0);
    const auto g = gauge_integrals(m, VectorXcd::Ones(4));
    for (Method me : {Method::gaugeP, Method::positiveP, Method::diffusionOnly}) {
        CHECK(std::isinf(tsim_best(g, me)));
        for (const auto& e : tsim(g, me)) CHECK_FALSE(std::isnan(e.t));
    }
    const auto r = analyze_variance(m, VectorXcd::Ones(4), 0.05, 0.2, 5);
    for (const auto& c : r.curves)
        for (double v : c.V) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("strategy on contact lattices") {
    const VectorXcd n32 = VectorXcd::Constant(32, 1.0), n4 = VectorXcd::Constant(4, 1.0);
    const auto a = gauge_strategy(gauge_integrals(contact(32, 1.0), n32), 32);
    CHECK(a.diffusion_only_preferred);
    CHECK(a.contact_heuristic_many_modes);
    const auto b = gauge_strategy(gauge_integrals(contact(4, 1.0), n4), 4);
    CHECK_FALSE(b.diffusion_only_preferred);
    CHECK_FALSE(b.contact_heuristic_many_modes);
}

TEST_CASE("variance report") {
    const auto sc = bose_hubbard_quench({});
    const auto r = analyze_variance(sc.model, sc.n_analysis, 0.05, 0.3, 31);
    CHECK(r.curves.size() == 3);
    for (const auto& c : r.curves) {
        CHECK(c.t.size() == 31);
        CHECK(c.V.size() == 31);
        for (double v : c.V) CHECK(std::isfinite(v));
        for (std::size_t i = 1; i < c.V.size(); ++i) CHECK(c.V[i] >= c.V[i - 1]);
    }
    CHECK(r.a_gaugeP == doctest::Approx(a_approx(r.integrals, 0.05)));
    CHECK_FALSE(r.linear_coupling_neglected);
    BhQuenchParams p;
    p.J = 2.0;
    CHECK(analyze_variance(bose_hubbard_quench(p).model, sc.n_analysis, 0.05, 0.3, 3).linear_coupling_neglected);
    CHECK(analyze_variance(sc.model, sc.n_analysis, 0.05, 0.3, 4, 0.3).a_gaugeP == 0.3);
    CHECK_THROWS_AS(analyze_variance(sc.model, sc.n_analysis, 0.05, 0.3, 1), ConfigError);
}

}
