#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "gaugep/model.hpp"
#include "helpers.hpp"

using namespace gaugep;

TEST_SUITE("model") {

TEST_CASE("line lattice geometry uses the minimum image") {
    const auto lat = LatticeSpec::line(6, 4.0);
    CHECK(lat.sites() == 6);
    CHECK(lat.cell_volume() == doctest::Approx(4.0 / 6));
    CHECK(lat.distance(0, 1) == doctest::Approx(4.0 / 6));
    CHECK(lat.distance(0, 5) == doctest::Approx(4.0 / 6));
    CHECK(lat.distance(0, 3) == doctest::Approx(2.0));
    CHECK(lat.distance(2, 4) == doctest::Approx(lat.distance(4, 2)));
}

TEST_CASE("2D distances and index round trip") {
    LatticeSpec lat;
    lat.extents = {4, 4};
    lat.lengths = {4.0, 8.0};
    const int a = lat.index({0, 0, 0}), b = lat.index({3, 2, 0});
    CHECK(lat.distance(a, b) == doctest::Approx(std::sqrt(1.0 + 16.0)));
    for (int s = 0; s < lat.sites(); ++s) CHECK(lat.index(lat.coords(s)) == s);
    CHECK(lat.cell_volume() == doctest::Approx(2.0));
}

TEST_CASE("lattice validation") {
    LatticeSpec lat;
    CHECK_THROWS_AS(validate(lat), ConfigError);
    lat.extents = {4};
    lat.lengths = {-1.0};
    CHECK_THROWS_AS(validate(lat), ConfigError);
    lat.lengths = {1.0, 2.0};
    CHECK_THROWS_AS(validate(lat), ConfigError);
    lat = LatticeSpec::line(4, 1.0);
    lat.periodic = false;
    CHECK_THROWS_AS(validate(lat), ConfigError);
}

TEST_CASE("soft-core potential formula") {
    const InteractionPotential p{-32.0, 1.0, 2.0, 3.0};
    CHECK(p(0.0) == doctest::Approx(32.0));
    CHECK(p(0.7) == doctest::Approx(32.0 / std::pow(0.49 + 1.0, 3)));
    const InteractionPotential q{-5.96e7, 12.5, 2.0, 3.0};
    CHECK(q(0.0) == doctest::Approx(5.96e7 / std::pow(12.5, 6)));
    CHECK_THROWS_AS(potential_row(LatticeSpec::line(4, 1.0), InteractionPotential{1.0, 0.0, 2.0, 3.0}), ConfigError);
}

TEST_CASE("potential matrix is the circulant of the row") {
    const auto lat = LatticeSpec::line(8, 5.0);
    const InteractionPotential p{-3.0, 0.8, 2.0, 3.0};
    const MatrixXd W = build_potential_matrix(lat, p);
    for (int n = 0; n < 8; ++n)
        for (int m = 0; m < 8; ++m) CHECK(W(n, m) == doctest::Approx(p(lat.distance(n, m))));
    CHECK((W - W.transpose()).norm() == 0.0);
}

TEST_CASE("symmetric square root and rectified interaction") {
    // W with negative eigenvalues: the root is complex symmetric
    const auto lat = LatticeSpec::line(6, 4.0);
    MatrixXd W = build_potential_matrix(lat, InteractionPotential{-32.0, 1.0, 2.0, 3.0});
    W.diagonal().array() -= 40.0;
    const MatrixXcd S = symmetric_sqrt(W);
    CHECK((S - S.transpose()).norm() < 1e-10 * S.norm());
    CHECK((S * S - W.cast<cplx>()).norm() < 1e-10 * W.norm());

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(W);
    const MatrixXd absW = es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().transpose();
    const MatrixXd U = rectified_U(S);
    CHECK((U - absW).norm() < 1e-10 * absW.norm());
    MatrixXd skew = MatrixXd::Identity(3, 3);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(symmetric_sqrt(skew), ContractViolation);
}

TEST_CASE("spectrum equals the eigenvalues of W") {
    for (int M : {5, 8, 16}) {
        const auto lat = LatticeSpec::line(M, 7.0);
        const auto row = potential_row(lat, InteractionPotential{-2.0, 0.5, 2.0, 3.0});
        const VectorXd wt = potential_spectrum(row, lat);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(circulant_from_row(lat, row));
        std::vector<double> a(wt.data(), wt.data() + M), b(es.eigenvalues().data(), es.eigenvalues().data() + M);
        for (double& x : a) x /= lat.cell_volume();
        std::sort(a.begin(), a.end());
        for (int i = 0; i < M; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
}

TEST_CASE("odd potential row is rejected") {
    const auto lat = LatticeSpec::line(4, 4.0);
    VectorXd row(4);
    row << 1.0, 0.5, 0.0, 0.2;
    CHECK_THROWS_AS(potential_spectrum(row, lat), ContractViolation);
}

TEST_CASE("model fields") {
    const auto m = testing::small_model(6, -32.0, 4.0);
    CHECK(m.W0 == doctest::Approx(32.0));
    CHECK(m.U0 == doctest::Approx(m.U(0, 0)));
    CHECK(m.U0 == doctest::Approx(m.w_tilde.cwiseAbs().sum() / m.lattice.volume()));
    CHECK_FALSE(m.has_linear());
    CHECK(m.interacting());

    const auto lat = LatticeSpec::line(6, 4.0);
    const auto md = build_model(lat, InteractionPotential{-32, 1, 2, 3}, SparseC(6, 6), false);
    CHECK(md.U0 == doctest::Approx(m.U0));
    CHECK(md.W.size() == 0);
}

TEST_CASE("linear couplings") {
    const auto lat = LatticeSpec::line(5, 5.0);
    const MatrixXcd T = MatrixXcd(tunneling_coupling(lat, 2.0));
    CHECK(T(0, 1) == cplx(2.0));
    CHECK(T(0, 4) == cplx(2.0));
    CHECK(T(0, 2) == cplx(0.0));
    CHECK(T(0, 0) == cplx(0.0));
    const MatrixXcd K = MatrixXcd(kinetic_coupling(lat, 0.5));
    // spacing 1: -1/(2m), diagonal 1/m
    CHECK(K(1, 2).real() == doctest::Approx(-1.0));
    CHECK(K(1, 1).real() == doctest::Approx(2.0));
    CHECK(K.rowwise().sum().norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(kinetic_coupling(lat, 0.0), ConfigError);

    SparseC bad(5, 5);
    bad.insert(0, 1) = cplx(1.0, 0.0);
    CHECK_THROWS_AS(build_model(lat, InteractionPotential{-1, 1, 2, 3}, bad), ConfigError);
}

TEST_CASE("two-component drive couples e and g per site and flips") {
    const auto lat = LatticeSpec::line(4, 4.0);
    const auto m = build_two_component_model(lat, InteractionPotential{-1, 1, 2, 3}, SparseC(4, 4), 3.0, 0.09);
    CHECK(m.components == 2);
    CHECK(m.modes() == 8);
    const MatrixXcd a = m.omega_dense(0.0), b = m.omega_dense(0.1);
    for (int n = 0; n < 4; ++n) {
        CHECK(a(n, n + 4).real() == doctest::Approx(1.5));
        CHECK(a(n + 4, n).real() == doctest::Approx(1.5));
        CHECK(b(n, n + 4).real() == doctest::Approx(-1.5));
    }
    CHECK((a.topLeftCorner(4, 4)).norm() == 0.0);
    CHECK(a.cwiseAbs().sum() == doctest::Approx(4 * 2 * 1.5));
}

}
