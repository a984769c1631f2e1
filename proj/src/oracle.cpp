#include "gaugep/oracle.hpp"

#include <cmath>

namespace gaugep {

namespace {

// Poisson probabilities p(0..n_max)
std::vector<double> poisson(double nbar, int n_max) {
    std::vector<double> p(n_max + 1);
    double lp = -nbar;
    for (int j = 0; j <= n_max; ++j) {
        if (j > 0) lp += std::log(nbar) - std::log(double(j));
        p[j] = nbar > 0.0 ? std::exp(lp) : (j == 0 ? 1.0 : 0.0);
    }
    return p;
}

constexpr int kCutoffLimit = 5000;

}  // namespace

double poisson_tail(double nbar, int n_max) {
    if (nbar <= 0.0) return 0.0;
    const auto p = poisson(nbar, n_max);
    double s = 0.0;
    for (int j = n_max; j >= 0; --j) s += p[j];
    return std::max(0.0, 1.0 - s);
}

FockCutoff choose_cutoff(const VectorXcd& phi, double tol) {
    double nb = 0.0;
    for (Eigen::Index k = 0; k < phi.size(); ++k) nb = std::max(nb, std::norm(phi[k]));
    if (nb == 0.0) return {0};
    // accumulate the head directly instead of 1 - sum to avoid cancellation near tol
    int n = static_cast<int>(nb);
    while (n < kCutoffLimit) {
        const auto p = poisson(nb, n + 200);
        double tail = 0.0;
        for (int j = n + 200; j > n; --j) tail += p[j];
        if (tail <= tol) return {n};
        n += 1;
    }
    throw PreconditionError("no Fock cutoff below the limit reaches the requested tail bound");
}

cplx fock_diagonal_evolve(const ModelSpec& model, const VectorXcd& phi, double t, const ProductSpec& obs,
                          FockCutoff cutoff) {
    if (model.has_linear()) throw PreconditionError("diagonal Fock oracle needs omega = 0");
    if (model.components != 1) throw PreconditionError("diagonal Fock oracle is single-component only");
    const int M = model.sites();
    if (phi.size() != M) throw ConfigError("amplitude vector does not match the site count");
    const FockCutoff need = choose_cutoff(phi);
    if (cutoff.n_max <= 0) cutoff = need;
    for (int k = 0; k < M; ++k)
        if (poisson_tail(std::norm(phi[k]), cutoff.n_max) > 10 * kFockTail && cutoff.n_max < need.n_max)
            throw PreconditionError("Fock cutoff too small for the initial coherent state");
    if (obs.annihilate.size() != 1 || obs.create.size() > 1)
        throw ConfigError("diagonal Fock oracle supports <a_m> and <a+_n a_m> only");
    const int m = obs.annihilate[0];
    const bool has_c = !obs.create.empty();
    const int n = has_c ? obs.create[0] : -1;
    if (m < 0 || m >= M || n >= M) throw ConfigError("mode index out of range");
    const MatrixXd W = circulant_from_row(model.lattice, model.w_row);
    auto Wnm = [&](int x, int y) { return W(x, y); };

    cplx prod = has_c ? std::conj(phi[n]) * phi[m] : phi[m];
    if (has_c && n == m) return prod;
    for (int k = 0; k < M; ++k) {
        const double nb = std::norm(phi[k]);
        const auto p = poisson(nb, cutoff.n_max);
        const double w = has_c ? Wnm(n, k) - Wnm(m, k) : -Wnm(m, k);
        cplx s = 0.0;
        for (int j = 0; j <= cutoff.n_max; ++j) s += p[j] * std::exp(cplx(0.0, w * t * j));
        prod *= s;
    }
    return prod;
}

double fock_g1(const ModelSpec& model, const VectorXcd& phi, double t, int dn) {
    const int M = model.sites();
    double s = 0.0;
    for (int n = 0; n < M; ++n) {
        const int m = ((n + dn) % M + M) % M;
        const cplx v = fock_diagonal_evolve(model, phi, t, {{n}, {m}});
        s += v.real() / std::sqrt(std::norm(phi[n]) * std::norm(phi[m]));
    }
    return s / M;
}

namespace {

void enumerate(int K, int N, std::vector<int>& cur, int k, std::vector<std::vector<int>>& out) {
    if (k == K - 1) {
        cur[k] = N;
        out.push_back(cur);
        return;
    }
    for (int j = N; j >= 0; --j) {
        cur[k] = j;
        enumerate(K, N - j, cur, k + 1, out);
    }
}

double binom(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

}  // namespace

ExactDiagonalizer::ExactDiagonalizer(const ModelSpec& model, const VectorXcd& phi, int n_total_max)
    : model_(model), K_(model.modes()) {
    if (model.sites() > kMaxSites) throw GuardRefusal("exact diagonalisation limited to 3 sites");
    if (phi.size() != K_) throw ConfigError("amplitude vector does not match the mode count");
    double ntot = phi.squaredNorm();
    nmax_ = n_total_max > 0 ? n_total_max : choose_cutoff(VectorXcd::Constant(1, std::sqrt(ntot))).n_max;
    const double d = binom(nmax_ + K_, K_);
    if (d > kMaxDimension) throw GuardRefusal("exact diagonalisation dimension exceeds 4096");
    if (poisson_tail(ntot, nmax_) > 1e-6) throw PreconditionError("total number cutoff truncates the state");
    sec_.resize(nmax_ + 1);
    std::vector<int> cur(K_);
    for (int N = 0; N <= nmax_; ++N) {
        Sector& s = sec_[N];
        enumerate(K_, N, cur, 0, s.basis);
        for (std::size_t i = 0; i < s.basis.size(); ++i) s.index[s.basis[i]] = static_cast<int>(i);
        dim_ += static_cast<int>(s.basis.size());
        s.psi.resize(s.basis.size());
        for (std::size_t i = 0; i < s.basis.size(); ++i) {
            cplx a = 1.0;
            for (int k = 0; k < K_; ++k) {
                const int nk = s.basis[i][k];
                a *= std::exp(-0.5 * std::norm(phi[k]) - 0.5 * std::lgamma(nk + 1.0)) *
                     (nk == 0 ? cplx(1.0) : std::pow(phi[k], nk));
            }
            s.psi[i] = a;
        }
        for (int w = 0; w < 2; ++w) {
            build_hamiltonian(s, w);
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(s.H[w]);
            s.V[w] = es.eigenvectors();
            s.E[w] = es.eigenvalues();
        }
    }
}

void ExactDiagonalizer::build_hamiltonian(Sector& s, int which) const {
    const int D = static_cast<int>(s.basis.size());
    const int M = model_.sites();
    const MatrixXd W = circulant_from_row(model_.lattice, model_.w_row);
    MatrixXcd om = MatrixXcd(model_.omega);
    if (model_.omega_flip.nonZeros() > 0) om += (which == 0 ? 1.0 : -1.0) * MatrixXcd(model_.omega_flip);
    s.H[which] = MatrixXcd::Zero(D, D);
    for (int i = 0; i < D; ++i) {
        const auto& n = s.basis[i];
        double e = 0.0;
        for (int a = 0; a < M; ++a) {
            for (int b = 0; b < M; ++b) e += 0.5 * W(a, b) * n[a] * n[b];
            e -= 0.5 * W(a, a) * n[a];
        }
        s.H[which](i, i) += e;
        for (int p = 0; p < K_; ++p)
            for (int q = 0; q < K_; ++q) {
                const cplx w = om(p, q);
                if (w == cplx(0.0, 0.0)) continue;
                if (p == q) {
                    s.H[which](i, i) += w * double(n[p]);
                    continue;
                }
                if (n[q] == 0) continue;
                auto m = n;
                const double amp = std::sqrt(double(m[q]));
                m[q] -= 1;
                const double amp2 = std::sqrt(double(m[p] + 1));
                m[p] += 1;
                s.H[which](s.index.at(m), i) += w * amp * amp2;
            }
    }
}

void ExactDiagonalizer::propagate(double dt, int which) {
    if (dt <= 0.0) return;
    for (auto& s : sec_) {
        const VectorXcd c = s.V[which].adjoint() * s.psi;
        VectorXcd ph(c.size());
        for (Eigen::Index j = 0; j < c.size(); ++j) ph[j] = std::exp(cplx(0.0, -s.E[which][j] * dt)) * c[j];
        s.psi = s.V[which] * ph;
    }
}

void ExactDiagonalizer::evolve_to(double t) {
    if (t < t_) throw ConfigError("exact evolution only runs forward");
    const double tf = model_.t_flip;
    if (t_ < tf) {
        const double t1 = std::min(t, tf);
        propagate(t1 - t_, 0);
        t_ = t1;
    }
    if (t > t_) {
        propagate(t - t_, 1);
        t_ = t;
    }
}

ExactDiagonalizer::State ExactDiagonalizer::apply_annihilators(const State& psi, const std::vector<int>& modes) const {
    State cur = psi;
    for (int q : modes) {
        if (q < 0 || q >= K_) throw ConfigError("mode index out of range");
        State next(sec_.size());
        for (std::size_t N = 0; N < sec_.size(); ++N) next[N] = VectorXcd::Zero(sec_[N].basis.size());
        for (std::size_t N = 1; N < sec_.size(); ++N) {
            const Sector& s = sec_[N];
            const Sector& lo = sec_[N - 1];
            for (std::size_t i = 0; i < s.basis.size(); ++i) {
                const cplx v = cur[N][i];
                if (v == cplx(0.0, 0.0) || s.basis[i][q] == 0) continue;
                auto m = s.basis[i];
                const double amp = std::sqrt(double(m[q]));
                m[q] -= 1;
                next[N - 1][lo.index.at(m)] += amp * v;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

cplx ExactDiagonalizer::expect(const ProductSpec& p) const {
    State psi(sec_.size());
    for (std::size_t N = 0; N < sec_.size(); ++N) psi[N] = sec_[N].psi;
    // <a+_c1 .. a+_ck a_a1 .. a_al> = < a_ck .. a_c1 psi | a_a1 .. a_al psi >
    std::vector<int> ann(p.annihilate.rbegin(), p.annihilate.rend());
    std::vector<int> cre(p.create.begin(), p.create.end());
    const State r = apply_annihilators(psi, ann);
    const State l = apply_annihilators(psi, cre);
    // both sides are indexed by the sector they end up in
    cplx s = 0.0;
    for (std::size_t N = 0; N < sec_.size(); ++N) s += l[N].dot(r[N]);
    return s;
}

double ExactDiagonalizer::norm() const {
    double s = 0.0;
    for (const auto& sec : sec_) s += sec.psi.squaredNorm();
    return std::sqrt(s);
}

double ExactDiagonalizer::energy() const {
    const int w = t_ < model_.t_flip ? 0 : 1;
    double e = 0.0;
    for (const auto& s : sec_) e += s.psi.dot(s.H[w] * s.psi).real();
    return e;
}

cplx exact_diag_small(const ModelSpec& model, const VectorXcd& phi, int n_total_max, double t,
                      const ProductSpec& obs) {
    ExactDiagonalizer ed(model, phi, n_total_max);
    ed.evolve_to(t);
    return ed.expect(obs);
}

}  // namespace gaugep
