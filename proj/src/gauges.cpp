#include "gaugep/gauges.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gaugep/analytics.hpp"

namespace gaugep {

GaugeConfig GaugeConfig::gauge_p(double a) {
    GaugeConfig g;
    g.drift = DriftGauge::standard;
    g.diffusion = a == 0.0 ? DiffusionGauge::none : DiffusionGauge::global;
    g.a = a;
    return g;
}

GaugeConfig GaugeConfig::adaptive(double t_fin) {
    GaugeConfig g;
    g.drift = DriftGauge::standard;
    g.diffusion = DiffusionGauge::adaptive;
    g.t_fin = t_fin;
    return g;
}

GaugeConfig GaugeConfig::diffusion_only(double a) {
    GaugeConfig g;
    g.diffusion = a == 0.0 ? DiffusionGauge::none : DiffusionGauge::global;
    g.a = a;
    return g;
}

GaugeConfig GaugeConfig::nonlocal(const MatrixXd& A, bool drift) {
    GaugeConfig g;
    g.drift = drift ? DriftGauge::standard : DriftGauge::none;
    g.diffusion = DiffusionGauge::nonlocal;
    g.A = A;
    return g;
}

GaugeConfig GaugeConfig::numeric(const MatrixXcd& O, bool drift) {
    GaugeConfig g;
    g.drift = drift ? DriftGauge::standard : DriftGauge::none;
    g.diffusion = DiffusionGauge::numeric;
    g.O = O;
    return g;
}

std::string GaugeConfig::describe() const {
    std::ostringstream s;
    s << (weighted() ? "drift=standard" : "drift=none") << " diffusion=";
    switch (diffusion) {
        case DiffusionGauge::none: s << "none"; break;
        case DiffusionGauge::global: s << "global(a=" << a << ")"; break;
        case DiffusionGauge::adaptive: s << "adaptive(t_fin=" << t_fin << ")"; break;
        case DiffusionGauge::nonlocal: s << "nonlocal(" << A.rows() << "x" << A.cols() << ")"; break;
        case DiffusionGauge::numeric: s << "numeric(" << O.rows() << "x" << O.cols() << ")"; break;
    }
    return s.str();
}

void validate(const GaugeConfig& g, int M) {
    if (!std::isfinite(g.a)) throw ConfigError("gauge parameter a must be finite");
    switch (g.diffusion) {
        case DiffusionGauge::none:
        case DiffusionGauge::global:
            break;
        case DiffusionGauge::adaptive:
            if (!(g.t_fin > 0.0)) throw ConfigError("adaptive gauge needs t_fin > 0");
            if (!g.weighted()) throw ConfigError("adaptive gauge requires the standard drift gauge");
            break;
        case DiffusionGauge::nonlocal:
            if (g.A.rows() != M || g.A.cols() != M) throw ConfigError("nonlocal gauge matrix A has the wrong size");
            if ((g.A - g.A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.A.cwiseAbs().maxCoeff()))
                throw ConfigError("nonlocal gauge matrix A must be symmetric");
            break;
        case DiffusionGauge::numeric: {
            if (g.O.rows() != 2 * M || g.O.cols() != 2 * M) throw ConfigError("numeric gauge O has the wrong size");
            const double err = (g.O * g.O.transpose() - MatrixXcd::Identity(2 * M, 2 * M)).cwiseAbs().maxCoeff();
            if (err > 1e-10 * std::max(1.0, g.O.cwiseAbs().maxCoeff()))
                throw ContractViolation("numeric gauge O is not orthogonal");
            break;
        }
    }
}

double clamp_gauge(double a) {
    if (!std::isfinite(a)) return a > 0 ? kGaugeClampMax : 0.0;
    return std::clamp(a, 0.0, kGaugeClampMax);
}

VectorXcd drift_gauge_vector(const TrajectoryState& s, int M) {
    VectorXcd f(2 * M);
    for (int m = 0; m < M; ++m) {
        const double ni = (s.alpha[m] * s.beta[m]).imag();
        f[m] = f[m + M] = cplx(0.0, ni);
    }
    return f;
}

VectorXcd apply_global_O(const VectorXd& xi, double a) {
    const Eigen::Index M = xi.size() / 2;
    const double c = std::cosh(a), s = std::sinh(a);
    VectorXcd out(2 * M);
    for (Eigen::Index m = 0; m < M; ++m) {
        out[m] = c * xi[m] - I * s * xi[m + M];
        out[m + M] = I * s * xi[m] + c * xi[m + M];
    }
    return out;
}

MatrixXcd local_O(const VectorXd& a) {
    const Eigen::Index M = a.size();
    MatrixXcd O = MatrixXcd::Zero(2 * M, 2 * M);
    for (Eigen::Index m = 0; m < M; ++m) {
        const double c = std::cosh(a[m]), s = std::sinh(a[m]);
        O(m, m) = O(m + M, m + M) = c;
        O(m, m + M) = -I * s;
        O(m + M, m) = I * s;
    }
    return O;
}

MatrixXcd global_O(int M, double a) { return local_O(VectorXd::Constant(M, a)); }

MatrixXcd nonlocal_O(const MatrixXd& A) {
    const Eigen::Index M = A.rows();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()));
    const MatrixXd& V = es.eigenvectors();
    const VectorXd& l = es.eigenvalues();
    const MatrixXd ch = V * l.array().cosh().matrix().asDiagonal() * V.transpose();
    const MatrixXd sh = V * l.array().sinh().matrix().asDiagonal() * V.transpose();
    MatrixXcd O(2 * M, 2 * M);
    O.topLeftCorner(M, M) = ch.cast<cplx>();
    O.bottomRightCorner(M, M) = ch.cast<cplx>();
    O.topRightCorner(M, M) = -I * sh.cast<cplx>();
    O.bottomLeftCorner(M, M) = I * sh.cast<cplx>();
    return O;
}

MatrixXcd gauge_matrix(const GaugeConfig& g, int M) {
    switch (g.diffusion) {
        case DiffusionGauge::none: return MatrixXcd::Identity(2 * M, 2 * M);
        case DiffusionGauge::global: return global_O(M, g.a);
        case DiffusionGauge::nonlocal: return nonlocal_O(g.A);
        case DiffusionGauge::numeric: return g.O;
        case DiffusionGauge::adaptive: break;
    }
    throw ContractViolation("adaptive gauge has no constant O");
}

namespace {

struct DenseInteraction {
    MatrixXd W, U;
};

DenseInteraction dense_interaction(const ModelSpec& model) {
    if (model.dense) return {model.W, model.U};
    if (model.sites() > 4096) throw PreconditionError("lattice too large for dense integrals");
    DenseInteraction d;
    d.W = circulant_from_row(model.lattice, model.w_row);
    d.U = rectified_U(symmetric_sqrt(d.W));
    return d;
}

}  // namespace

GaugeIntegrals gauge_integrals(const ModelSpec& model, const VectorXcd& n) {
    const int M = model.sites();
    if (n.size() != M) throw ConfigError("density length differs from interacting site count");
    const DenseInteraction d = dense_interaction(model);
    GaugeIntegrals g;
    g.U0 = model.U0;
    const VectorXd ni = n.imag(), nr = n.real();
    const MatrixXd renn = (n * n.adjoint()).real();
    g.I1 = ni.dot(d.U * ni);
    g.I2 = (d.U.array().square() * renn.array()).sum();
    g.I1P = (d.W.array().square().matrix() * VectorXd::Ones(M)).dot(nr) / M;
    g.I2P = (d.U.array() * (d.W * d.W).array() * renn.array()).sum() / M;
    return g;
}

double a_approx(const GaugeIntegrals& g, double t_opt) {
    if (!(g.U0 > 0.0)) throw PreconditionError("gauge undefined without interactions (U0 = 0)");
    if (t_opt < 0.0) t_opt = 0.0;
    const double arg = 4.0 * g.I2 * t_opt / g.U0 + std::pow(1.0 + 4.0 * g.I1 / g.U0, 1.5);
    if (!(arg > 0.0)) return 0.0;
    return clamp_gauge(std::log(arg) / 6.0);
}

double a_adaptive(const GaugeIntegrals& g, double t, double t_fin) {
    return a_approx(g, std::max(0.0, t_fin - t));
}

double a_opt_diffusion_only(const GaugeIntegrals& g, double t_opt) {
    if (!(g.U0 > 0.0)) throw PreconditionError("gauge undefined without interactions (U0 = 0)");
    const double arg = 4.0 * t_opt * t_opt * g.I2P / (3.0 * g.U0) + 1.0;
    if (!(arg > 0.0)) return 0.0;
    return clamp_gauge(0.25 * std::log(arg));
}

namespace {

struct EigenFrame {
    MatrixXd V;
    VectorXd lam;
    VectorXd x;  // eigenvalues of sqrtW^-1 N' W N' sqrtW
};

EigenFrame nonlocal_frame(const ModelSpec& model, const VectorXd& n) {
    if (!model.dense) throw PreconditionError("nonlocal gauge needs dense matrices");
    const int M = model.sites();
    if (n.size() != M) throw ConfigError("density length differs from site count");
    const double scale = std::max(model.W.cwiseAbs().maxCoeff(), 1e-300);
    if ((model.W - model.U).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw PreconditionError("nonlocal gauge formula requires W = U (W positive semi-definite)");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(model.W);
    EigenFrame f{es.eigenvectors(), es.eigenvalues(), VectorXd::Zero(M)};
    const double floor = kSqrtWFloor * std::max(f.lam.cwiseAbs().maxCoeff(), 1e-300);
    VectorXd sq(M), isq(M);
    for (int j = 0; j < M; ++j) {
        const double l = std::max(f.lam[j], 0.0);
        sq[j] = std::sqrt(l);
        isq[j] = l > floor ? 1.0 / sq[j] : 0.0;
    }
    const MatrixXd NWN = n.asDiagonal() * model.W * n.asDiagonal();
    const MatrixXd X = isq.asDiagonal() * (f.V.transpose() * NWN * f.V) * sq.asDiagonal();
    const double xs = std::max(X.cwiseAbs().maxCoeff(), 1e-300);
    const MatrixXd off = X - MatrixXd(X.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > 1e-8 * xs)
        throw PreconditionError("nonlocal gauge formula requires a uniform density (N'WN' must commute with W)");
    f.x = X.diagonal();
    return f;
}

MatrixXd sym_function(const MatrixXd& A, double (*fn)(double)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()));
    VectorXd l = es.eigenvalues();
    for (Eigen::Index j = 0; j < l.size(); ++j) l[j] = fn(l[j]);
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

MatrixXd nonlocal_A(const ModelSpec& model, const VectorXd& n, double t_opt) {
    const EigenFrame f = nonlocal_frame(model, n);
    const int M = model.sites();
    VectorXd a(M);
    for (int j = 0; j < M; ++j) a[j] = std::log(4.0 * M * t_opt * f.x[j] + 1.0) / 6.0;
    MatrixXd A = f.V * a.asDiagonal() * f.V.transpose();
    A = 0.5 * (A + A.transpose());
    const MatrixXd comm = A * model.W - model.W * A;
    if (comm.cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, A.cwiseAbs().maxCoeff()) * model.W.cwiseAbs().maxCoeff())
        throw ContractViolation("nonlocal A does not commute with W");
    return A;
}

double nonlocal_A_residual(const ModelSpec& model, const VectorXd& n, double t_opt, const MatrixXd& A) {
    const int M = model.sites();
    const MatrixXd& W = model.W;
    const MatrixXd sW = model.sqrtW.real();
    const MatrixXd e4 = sym_function(-4.0 * A, [](double x) { return std::exp(x); });
    const MatrixXd e6 = sym_function(-6.0 * A, [](double x) { return std::exp(x); });
    const MatrixXd mid = sW * n.asDiagonal() * W * n.asDiagonal() * sW;
    const MatrixXd R = W - W * e4 - 4.0 * M * t_opt * mid * e6;
    return R.norm() / std::max(W.norm(), 1e-300);
}

MatrixXcd antisymmetric_exp(const MatrixXd& h) {
    const MatrixXcd H = I * h.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
    const VectorXcd e = es.eigenvalues().array().exp().cast<cplx>();
    return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

double gauge_objective(const ModelSpec& model, const VectorXcd& n0, double t_opt, const MatrixXcd& O) {
    return V_gaugeP(t_opt, model, O, InitialMoments::deterministic(n0));
}

double a_best_global(const ModelSpec& model, const VectorXcd& n0, double t_opt) {
    const int M = model.sites();
    const InitialMoments mom = InitialMoments::deterministic(n0);
    auto f = [&](double a) { return V_gaugeP(t_opt, model, global_O(M, a), mom); };
    const int K = 200;
    const double amax = 5.0;
    int best = 0;
    double fb = f(0.0);
    for (int k = 1; k <= K; ++k) {
        const double v = f(amax * k / K);
        if (v < fb) fb = v, best = k;
    }
    double lo = amax * std::max(0, best - 1) / K, hi = amax * std::min(K, best + 1) / K;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-9) {
        if (f1 < f2) {
            hi = x2, x2 = x1, f2 = f1;
            x1 = hi - gr * (hi - lo), f1 = f(x1);
        } else {
            lo = x1, x1 = x2, f1 = f2;
            x2 = lo + gr * (hi - lo), f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

OptimizerResult optimize_O_numeric(const ModelSpec& model, const VectorXcd& n0, double t_opt,
                                   const GaugeConfig& init, const OptimizerOptions& opt) {
    const int M = model.sites();
    if (M > kOptimizerMaxModes) throw PreconditionError("numeric gauge optimisation limited to 64 modes");
    if (!model.dense) throw PreconditionError("numeric gauge optimisation needs dense matrices");
    const int N = 2 * M;
    const InitialMoments mom = InitialMoments::deterministic(n0);

    MatrixXd h0 = MatrixXd::Zero(N, N);
    MatrixXcd base = MatrixXcd::Identity(N, N);
    switch (init.diffusion) {
        case DiffusionGauge::none: break;
        case DiffusionGauge::global:
            for (int m = 0; m < M; ++m) h0(m, m + M) = -init.a, h0(m + M, m) = init.a;
            break;
        case DiffusionGauge::nonlocal:
            validate(init, M);
            h0.topRightCorner(M, M) = -init.A;
            h0.bottomLeftCorner(M, M) = init.A;
            break;
        case DiffusionGauge::numeric:
            validate(init, M);
            base = init.O;
            break;
        case DiffusionGauge::adaptive:
            throw ConfigError("adaptive gauge cannot seed the numeric optimiser");
    }

    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) idx.emplace_back(i, j);
    const int K = static_cast<int>(idx.size());
    auto to_h = [&](const VectorXd& p) {
        MatrixXd h = MatrixXd::Zero(N, N);
        for (int k = 0; k < K; ++k) {
            h(idx[k].first, idx[k].second) = p[k];
            h(idx[k].second, idx[k].first) = -p[k];
        }
        return h;
    };
    auto O_of = [&](const VectorXd& p) { return MatrixXcd(base * antisymmetric_exp(to_h(p))); };
    auto f = [&](const VectorXd& p) { return V_gaugeP(t_opt, model, O_of(p), mom); };
    auto grad = [&](VectorXd p) {
        VectorXd g(K);
        for (int k = 0; k < K; ++k) {
            const double x = p[k];
            p[k] = x + opt.fd_step;
            const double fp = f(p);
            p[k] = x - opt.fd_step;
            const double fm = f(p);
            p[k] = x;
            g[k] = (fp - fm) / (2.0 * opt.fd_step);
        }
        return g;
    };

    VectorXd p(K);
    for (int k = 0; k < K; ++k) p[k] = h0(idx[k].first, idx[k].second);
    OptimizerResult r;
    double fx = f(p);
    r.V_init = fx;
    VectorXd g = grad(p), d = -g;
    double step = 1.0 / std::max(g.norm(), 1e-12);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        if (g.lpNorm<Eigen::Infinity>() < opt.gtol) {
            r.converged = true;
            break;
        }
        double slope = g.dot(d);
        if (slope >= 0.0) {
            d = -g;
            slope = -g.squaredNorm();
        }
        double s = step, fn = fx;
        VectorXd pn;
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            pn = p + s * d;
            fn = f(pn);
            if (fn <= fx + 1e-4 * s * slope) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            if (d.isApprox(-g)) break;
            d = -g;
            continue;
        }
        const double df = fx - fn;
        p = pn;
        fx = fn;
        step = 2.0 * s;
        const VectorXd gn = grad(p);
        const double beta = std::max(0.0, gn.dot(gn - g) / std::max(g.squaredNorm(), 1e-300));
        d = -gn + ((it + 1) % K == 0 ? 0.0 : beta) * d;
        g = gn;
        if (df < opt.ftol * std::max(1.0, std::abs(fx))) {
            r.converged = true;
            ++it;
            break;
        }
    }
    r.iterations = it;
    r.h = to_h(p);
    r.O = O_of(p);
    r.V_final = fx;
    return r;
}

VectorXd gauge_profile_local(const MatrixXcd& O) {
    const Eigen::Index M = O.rows() / 2;
    VectorXd a(M);
    for (Eigen::Index mu = 0; mu < M; ++mu) a[mu] = std::asinh(O(M + mu, mu).imag());
    return a;
}

VectorXd gauge_profile_nonlocal(const MatrixXcd& O) {
    const Eigen::Index M = O.rows() / 2;
    VectorXd a(M);
    for (Eigen::Index mu = 0; mu < M; ++mu) a[mu] = std::asinh(O(M, mu).imag());
    return a;
}

}  // namespace gaugep
