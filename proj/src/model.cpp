#include "gaugep/model.hpp"

#include <cmath>

#include "gaugep/fft.hpp"

namespace gaugep {

LatticeSpec LatticeSpec::line(int sites, double box_length) {
    LatticeSpec lat;
    lat.extents = {sites};
    lat.lengths = {box_length};
    return lat;
}

int LatticeSpec::sites() const {
    int m = 1;
    for (int e : extents) m *= e;
    return m;
}

double LatticeSpec::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dims(); ++d) v *= spacing(d);
    return v;
}

std::array<int, 3> LatticeSpec::coords(int site) const {
    std::array<int, 3> c{0, 0, 0};
    for (int d = dims() - 1; d >= 0; --d) {
        c[d] = site % extents[d];
        site /= extents[d];
    }
    return c;
}

int LatticeSpec::index(const std::array<int, 3>& c) const {
    int s = 0;
    for (int d = 0; d < dims(); ++d) {
        int v = ((c[d] % extents[d]) + extents[d]) % extents[d];
        s = s * extents[d] + v;
    }
    return s;
}

double LatticeSpec::distance(int n, int m) const {
    auto cn = coords(n), cm = coords(m);
    double r2 = 0.0;
    for (int d = 0; d < dims(); ++d) {
        int k = std::abs(cn[d] - cm[d]);
        k = std::min(k, extents[d] - k);
        double x = k * spacing(d);
        r2 += x * x;
    }
    return std::sqrt(r2);
}

void validate(const LatticeSpec& lat) {
    if (lat.extents.empty() || lat.extents.size() > 3)
        throw ConfigError("lattice must have 1 to 3 dimensions");
    if (lat.lengths.size() != lat.extents.size())
        throw ConfigError("lattice lengths and extents differ in rank");
    for (int d = 0; d < lat.dims(); ++d) {
        if (lat.extents[d] < 1) throw ConfigError("lattice extent must be positive");
        if (!(lat.lengths[d] > 0.0) || !std::isfinite(lat.lengths[d]))
            throw ConfigError("lattice box length must be positive");
    }
    if (!lat.periodic) throw ConfigError("only periodic lattices are supported");
}

double InteractionPotential::operator()(double r) const {
    return -C6 / std::pow(std::pow(r, a_exp) + std::pow(eps, a_exp), b_exp);
}

VectorXd potential_row(const LatticeSpec& lat, const InteractionPotential& pot) {
    validate(lat);
    if (!(pot.eps > 0.0)) throw ConfigError("softening length eps must be positive");
    const int M = lat.sites();
    VectorXd row(M);
    for (int q = 0; q < M; ++q) row[q] = pot(lat.distance(q, 0));
    return row;
}

MatrixXd circulant_from_row(const LatticeSpec& lat, const VectorXd& row) {
    const int M = lat.sites();
    MatrixXd W(M, M);
    for (int n = 0; n < M; ++n) {
        auto cn = lat.coords(n);
        for (int m = 0; m < M; ++m) {
            auto cm = lat.coords(m);
            std::array<int, 3> diff{cn[0] - cm[0], cn[1] - cm[1], cn[2] - cm[2]};
            W(n, m) = row[lat.index(diff)];
        }
    }
    return W;
}

MatrixXd build_potential_matrix(const LatticeSpec& lat, const InteractionPotential& pot) {
    return circulant_from_row(lat, potential_row(lat, pot));
}

MatrixXcd symmetric_sqrt(const MatrixXd& W) {
    if (W.rows() != W.cols()) throw ContractViolation("symmetric_sqrt: matrix not square");
    const double scale = std::max(W.cwiseAbs().maxCoeff(), 1e-300);
    if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ContractViolation("symmetric_sqrt: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(W);
    const VectorXd& lam = es.eigenvalues();
    VectorXcd s(lam.size());
    for (int j = 0; j < lam.size(); ++j)
        s[j] = lam[j] >= 0.0 ? cplx(std::sqrt(lam[j]), 0.0) : cplx(0.0, std::sqrt(-lam[j]));
    const MatrixXcd V = es.eigenvectors().cast<cplx>();
    MatrixXcd r = V * s.asDiagonal() * V.transpose();
    return 0.5 * (r + r.transpose());
}

MatrixXd rectified_U(const MatrixXcd& sqrtW) {
    MatrixXcd u = sqrtW * sqrtW.adjoint();
    const double scale = std::max(u.cwiseAbs().maxCoeff(), 1e-300);
    if (u.imag().cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ContractViolation("rectified_U: imaginary part above tolerance");
    MatrixXd U = u.real();
    return 0.5 * (U + U.transpose());
}

VectorXd potential_spectrum(const VectorXd& w_row, const LatticeSpec& lat) {
    const int M = lat.sites();
    if (w_row.size() != M) throw ContractViolation("potential_spectrum: row length mismatch");
    Fft fft(lat.extents);
    for (int q = 0; q < M; ++q) fft.data()[q] = w_row[q];
    fft.forward();
    const double dV = lat.cell_volume();
    const double tol = 1e-10 * dV * std::max(w_row.cwiseAbs().sum(), 1e-300);
    VectorXd wt(M);
    for (int k = 0; k < M; ++k) {
        cplx v = dV * fft.data()[k];
        if (std::abs(v.imag()) > tol)
            throw ContractViolation("potential_spectrum: potential is not even");
        wt[k] = v.real();
    }
    return wt;
}

namespace {

// laplacian: hop and onsite are divided by the squared spacing of each dimension
SparseC nearest_neighbour(const LatticeSpec& lat, double hop, double onsite, bool laplacian) {
    const int M = lat.sites();
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int n = 0; n < M; ++n) {
        auto c = lat.coords(n);
        for (int d = 0; d < lat.dims(); ++d) {
            if (lat.extents[d] < 2) continue;
            double h = hop, on = onsite;
            if (laplacian) {
                double dx = lat.spacing(d);
                h /= dx * dx;
                on /= dx * dx;
            }
            for (int s : {+1, -1}) {
                auto cc = c;
                cc[d] += s;
                trip.emplace_back(n, lat.index(cc), h);
            }
            if (on != 0.0) trip.emplace_back(n, n, on);
        }
    }
    SparseC w(M, M);
    w.setFromTriplets(trip.begin(), trip.end());
    w.prune(cplx(0.0, 0.0));
    return w;
}

}  // namespace

SparseC tunneling_coupling(const LatticeSpec& lat, double J) {
    validate(lat);
    return nearest_neighbour(lat, J, 0.0, false);
}

SparseC kinetic_coupling(const LatticeSpec& lat, double mass) {
    validate(lat);
    if (!(mass > 0.0)) throw ConfigError("kinetic coupling needs a positive mass");
    const double c = 1.0 / (2.0 * mass);
    return nearest_neighbour(lat, -c, 2.0 * c, true);
}

MatrixXcd ModelSpec::omega_dense(double t) const {
    MatrixXcd w = MatrixXcd(omega);
    if (omega_flip.nonZeros() > 0) w += flip_sign(t) * MatrixXcd(omega_flip);
    return w;
}

ModelSpec build_model(const LatticeSpec& lat, const VectorXd& w_row, const SparseC& omega,
                      bool dense) {
    validate(lat);
    ModelSpec m;
    m.lattice = lat;
    const int M = lat.sites();
    if (w_row.size() != M) throw ConfigError("potential row length differs from site count");
    if (omega.rows() != 0 && (omega.rows() != M || omega.cols() != M))
        throw ConfigError("coupling matrix size differs from site count");
    m.omega = omega.rows() == 0 ? SparseC(M, M) : omega;
    m.omega_flip = SparseC(M, M);
    SparseC herm = SparseC(m.omega.adjoint()) - m.omega;
    if (herm.norm() > 1e-12 * std::max(1.0, m.omega.norm()))
        throw ConfigError("linear coupling is not Hermitian");
    m.w_row = w_row;
    m.W0 = w_row[0];
    m.w_tilde = potential_spectrum(w_row, lat);
    m.U0 = m.w_tilde.cwiseAbs().sum() / lat.volume();
    m.dense = dense;
    if (dense) {
        m.W = circulant_from_row(lat, w_row);
        m.sqrtW = symmetric_sqrt(m.W);
        m.U = rectified_U(m.sqrtW);
        m.U0 = m.U(0, 0);
    }
    return m;
}

ModelSpec build_model(const LatticeSpec& lat, const InteractionPotential& pot,
                      const SparseC& omega, bool dense) {
    return build_model(lat, potential_row(lat, pot), omega, dense);
}

ModelSpec build_two_component_model(const LatticeSpec& lat, const InteractionPotential& pot,
                                    const SparseC& omega_single, double kappa, double t_flip,
                                    bool dense) {
    ModelSpec m = build_model(lat, pot, omega_single, dense);
    const int M = lat.sites();
    m.components = 2;
    std::vector<Eigen::Triplet<cplx>> lin, flip;
    for (int k = 0; k < m.omega.outerSize(); ++k)
        for (SparseC::InnerIterator it(m.omega, k); it; ++it) {
            lin.emplace_back(it.row(), it.col(), it.value());
            lin.emplace_back(it.row() + M, it.col() + M, it.value());
        }
    for (int n = 0; n < M; ++n) {
        flip.emplace_back(n, n + M, 0.5 * kappa);
        flip.emplace_back(n + M, n, 0.5 * kappa);
    }
    m.omega = SparseC(2 * M, 2 * M);
    m.omega.setFromTriplets(lin.begin(), lin.end());
    m.omega_flip = SparseC(2 * M, 2 * M);
    m.omega_flip.setFromTriplets(flip.begin(), flip.end());
    m.omega_flip.prune(cplx(0.0, 0.0));
    m.t_flip = t_flip;
    return m;
}

}  // namespace gaugep
