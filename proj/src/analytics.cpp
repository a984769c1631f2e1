#include "gaugep/analytics.hpp"

#include <algorithm>
#include <cmath>

namespace gaugep {

namespace {

// sum_j x^j / (j+p)!
cplx phi_series(cplx x, int p) {
    double fact = 1.0;
    for (int k = 2; k <= p; ++k) fact *= k;
    cplx term = 1.0 / fact, s = term;
    for (int j = 1; j < 30; ++j) {
        term *= x / double(j + p);
        s += term;
        if (std::abs(term) < 1e-18 * std::abs(s)) break;
    }
    return s;
}

void require_dense(const ModelSpec& model, const char* who) {
    if (!model.dense) throw PreconditionError(std::string(who) + ": model was built without dense matrices");
}

void check_orthogonal(const MatrixXcd& O, int M) {
    if (O.rows() != 2 * M || O.cols() != 2 * M) throw ContractViolation("diffusion gauge has the wrong size");
    const double err = (O * O.transpose() - MatrixXcd::Identity(2 * M, 2 * M)).cwiseAbs().maxCoeff();
    if (err > 1e-8 * std::max(1.0, O.cwiseAbs().maxCoeff())) throw ContractViolation("diffusion gauge is not orthogonal");
}

// G = S O O^dagger S^dagger with S = diag(-i sqrtW, sqrtW)
MatrixXcd noise_gram(const ModelSpec& model, const MatrixXcd& O) {
    const int M = model.sites();
    MatrixXcd S = MatrixXcd::Zero(2 * M, 2 * M);
    S.topLeftCorner(M, M) = -I * model.sqrtW;
    S.bottomRightCorner(M, M) = model.sqrtW;
    const MatrixXcd X = S * O;
    return X * X.adjoint();
}

MatrixXcd block_sum(const MatrixXcd& G, int M) {
    return G.topLeftCorner(M, M) + G.topRightCorner(M, M) + G.bottomLeftCorner(M, M) +
           G.bottomRightCorner(M, M);
}

void check_moments(const InitialMoments& m, int M) {
    if (m.n.size() != M || m.nn_conj.rows() != M || m.nii_nii.rows() != M)
        throw ConfigError("initial moments do not match the interacting site count");
}

double covariance_terms(double t, const MatrixXd& W, const MatrixXd& C0, const MatrixXd& C0t) {
    double s = 0.0;
    if (C0.size() > 0) s += 2.0 * t * t * (W * C0 * W).trace();
    if (C0t.size() > 0) s -= 2.0 * t * (W * C0t).trace();
    return s;
}

}  // namespace

cplx phi2(cplx x) {
    if (std::abs(x) < 0.5) return phi_series(x, 2);
    return (std::exp(x) - 1.0 - x) / (x * x);
}

cplx phi3(cplx x) {
    if (std::abs(x) < 0.5) return phi_series(x, 3);
    return (std::exp(x) - 1.0 - x - 0.5 * x * x) / (x * x * x);
}

const char* method_name(Method m) {
    switch (m) {
        case Method::gaugeP: return "gauge_p";
        case Method::positiveP: return "positive_p";
        case Method::diffusionOnly: return "diffusion_only";
    }
    return "?";
}

InitialMoments InitialMoments::deterministic(const VectorXcd& n0) {
    InitialMoments m;
    m.n = n0;
    m.nn_conj = n0 * n0.adjoint();
    const VectorXd ni = n0.imag();
    m.nii_nii = ni * ni.transpose();
    return m;
}

double V_gaugeP(double t, const ModelSpec& model, const MatrixXcd& O, const InitialMoments& m, double V0) {
    require_dense(model, "V_gaugeP");
    const int M = model.sites();
    check_orthogonal(O, M);
    check_moments(m, M);
    if (t == 0.0) return V0;
    const MatrixXcd G = noise_gram(model, O);
    const MatrixXcd P = block_sum(G, M);

    double direct = 0.5 * t * G.trace().real();
    double cross = 0.0;
    const MatrixXd ImG = G.imag();
    for (int lam = 0; lam < 2 * M; ++lam) cross += ImG.col(lam).sum() * m.n[lam % M].imag();
    cross *= t;
    double weight = 0.0;
    for (int k = 0; k < M; ++k)
        for (int kp = 0; kp < M; ++kp) {
            const cplx p = P(k, kp);
            const double q = 0.5 * (m.nn_conj(k, kp) * t * t * p * phi2(t * p)).real() + t * m.nii_nii(k, kp);
            weight += p.real() * q;
        }
    return V0 + (direct + cross + M * weight) / (2.0 * M);
}

double V_positiveP(double t, const ModelSpec& model, const InitialMoments& m, const MatrixXd& C0,
                   const MatrixXd& C0t, double V0) {
    require_dense(model, "V_positiveP");
    const int M = model.sites();
    check_moments(m, M);
    if (t == 0.0) return V0;
    const MatrixXd& W = model.W;
    const MatrixXd& U = model.U;
    const MatrixXd W2 = W * W;
    const VectorXd np = m.n.real();
    double s = t * U.trace() - t * t * (W * np.asDiagonal() * W).trace() + covariance_terms(t, W, C0, C0t);
    for (int k = 0; k < M; ++k)
        for (int kp = 0; kp < M; ++kp) {
            const double x = 2.0 * U(k, kp) * t;
            s += 2.0 * W2(k, kp) * (m.nn_conj(k, kp) * t * t * x * phi3(x)).real();
        }
    return V0 + s / (2.0 * M);
}

double V_positiveP_general(double t, const ModelSpec& model, const MatrixXcd& O, const InitialMoments& m,
                           const MatrixXd& C0, const MatrixXd& C0t, double V0) {
    require_dense(model, "V_positiveP_general");
    const int M = model.sites();
    check_orthogonal(O, M);
    check_moments(m, M);
    if (t == 0.0) return V0;
    const MatrixXd& W = model.W;
    const MatrixXcd G = noise_gram(model, O);
    const MatrixXcd P = block_sum(G, M);
    const MatrixXd W2 = W * W;

    double s = 0.5 * t * G.trace().real() + covariance_terms(t, W, C0, C0t);
    for (int k = 0; k < M; ++k)
        for (int kp = 0; kp < M; ++kp) {
            const cplx x = t * P(k, kp);
            s += 2.0 * W2(k, kp) * (m.nn_conj(k, kp) * t * t * x * phi3(x)).real();
        }

    VectorXcd nstack(2 * M);
    nstack << m.n.conjugate(), m.n.conjugate();
    MatrixXd Wbar = MatrixXd::Zero(2 * M, 2 * M);
    Wbar.topLeftCorner(M, M) = -W;
    Wbar.bottomRightCorner(M, M) = W;
    MatrixXd F(2 * M, 2 * M);
    F.setOnes();
    const MatrixXd imGN = (G * nstack.asDiagonal()).imag();
    const VectorXd np = m.n.real();
    const double cross = 2.0 * (W * np.asDiagonal() * W).trace() - (imGN * F * Wbar).trace();
    s -= 0.5 * t * t * cross;
    return V0 + s / (2.0 * M);
}

double V_gaugeP_expanded(double t, const GaugeIntegrals& g, double a, double V0) {
    return V0 + 0.5 * t * g.U0 * std::cosh(2.0 * a) + t * std::exp(-2.0 * a) * g.I1 +
           0.5 * t * t * std::exp(-4.0 * a) * g.I2;
}

double V_positiveP_expanded(double t, const GaugeIntegrals& g, double V0) {
    return V0 + 0.5 * t * g.U0 - 0.5 * t * t * g.I1P + t * t * t * g.I2P / 3.0;
}

double V_diffusionOnly_expanded(double t, const GaugeIntegrals& g, double a, double V0) {
    return V0 + 0.5 * t * g.U0 * std::cosh(2.0 * a) - 0.5 * t * t * g.I1P +
           t * t * t * std::exp(-2.0 * a) * g.I2P / 3.0;
}

std::vector<TsimEstimate> tsim(const GaugeIntegrals& g, Method method) {
    const double inf = std::numeric_limits<double>::infinity();
    TsimEstimate direct{"direct_noise", g.U0 > 0.0 ? 20.0 / g.U0 : inf, "", false};
    TsimEstimate amp;
    switch (method) {
        case Method::gaugeP:
            amp = {"weight_dominated", g.U0 > 0.0 && g.I2 > 0.0 ? 8.0 / std::sqrt(g.U0 * std::sqrt(g.I2)) : inf,
                   "I2 > U0^2/40", false};
            direct.condition = "I2 <= U0^2/40";
            amp.applies = g.I2 > g.U0 * g.U0 / 40.0;
            direct.applies = !amp.applies;
            return {amp, direct};
        case Method::positiveP:
            amp = {"noise_amplification", g.I2P > 0.0 ? 3.0 / std::cbrt(g.I2P) : inf,
                   "3/I2P^(1/3) < 20/U0", false};
            break;
        case Method::diffusionOnly:
            amp = {"noise_amplification",
                   g.I2P > 0.0 && g.U0 > 0.0 ? 4.0 / std::pow(g.U0 * g.I2P, 0.25) : inf,
                   "4/(U0 I2P)^(1/4) < 20/U0", false};
            break;
    }
    direct.condition = "20/U0 <= noise amplification estimate";
    amp.applies = amp.t < direct.t;
    direct.applies = !amp.applies;
    return {amp, direct};
}

double tsim_best(const GaugeIntegrals& g, Method method) {
    const auto est = tsim(g, method);
    for (const auto& e : est)
        if (e.applies) return e.t;
    double t = std::numeric_limits<double>::infinity();
    for (const auto& e : est) t = std::min(t, e.t);
    return t;
}

GaugeStrategy gauge_strategy(const GaugeIntegrals& g, int M) {
    GaugeStrategy s;
    s.diffusion_only_preferred = g.I2P < g.U0 / 16.0 * g.I2;
    s.diffusion_gauge_useful = g.I2P > 0.03 * g.U0 * g.U0 * g.U0;
    s.contact_heuristic_many_modes = M >= 16;
    s.tsim_gaugeP = tsim_best(g, Method::gaugeP);
    s.tsim_positiveP = tsim_best(g, Method::positiveP);
    s.tsim_diffusionOnly = tsim_best(g, Method::diffusionOnly);
    return s;
}

VarianceReport analyze_variance(const ModelSpec& model, const VectorXcd& n0, double t_opt, double t_max,
                                int samples, double a_fixed) {
    if (samples < 2) throw ConfigError("need at least two curve samples");
    if (!(t_max > 0.0)) throw ConfigError("curve end time must be positive");
    VarianceReport r;
    r.integrals = gauge_integrals(model, n0);
    r.t_opt = t_opt;
    r.linear_coupling_neglected = model.has_linear();
    const bool interacting = r.integrals.U0 > 0.0;
    if (interacting) {
        r.a_gaugeP = a_fixed >= 0.0 ? a_fixed : a_approx(r.integrals, t_opt);
        r.a_diffusionOnly = a_fixed >= 0.0 ? a_fixed : a_opt_diffusion_only(r.integrals, t_opt);
    }
    for (Method m : {Method::gaugeP, Method::positiveP, Method::diffusionOnly})
        r.tsim_estimates[method_name(m)] = tsim(r.integrals, m);
    r.strategy = gauge_strategy(r.integrals, model.sites());

    const int M = model.sites();
    const InitialMoments mom = InitialMoments::deterministic(n0);
    VarianceCurve cg{Method::gaugeP, r.a_gaugeP, {}, {}};
    VarianceCurve cp{Method::positiveP, 0.0, {}, {}};
    VarianceCurve cd{Method::diffusionOnly, r.a_diffusionOnly, {}, {}};
    const MatrixXcd Og = global_O(M, r.a_gaugeP), Od = global_O(M, r.a_diffusionOnly);
    for (int i = 0; i < samples; ++i) {
        const double t = t_max * i / (samples - 1);
        for (auto* c : {&cg, &cp, &cd}) c->t.push_back(t);
        if (model.dense) {
            cg.V.push_back(V_gaugeP(t, model, Og, mom));
            cp.V.push_back(V_positiveP(t, model, mom));
            cd.V.push_back(V_positiveP_general(t, model, Od, mom));
        } else {
            cg.V.push_back(V_gaugeP_expanded(t, r.integrals, r.a_gaugeP));
            cp.V.push_back(V_positiveP_expanded(t, r.integrals));
            cd.V.push_back(V_diffusionOnly_expanded(t, r.integrals, r.a_diffusionOnly));
        }
    }
    r.curves = {cg, cp, cd};
    return r;
}

}  // namespace gaugep
