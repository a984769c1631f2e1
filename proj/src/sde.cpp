#include "gaugep/sde.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "gaugep/rng.hpp"
#include "gaugep/spectral.hpp"

namespace gaugep {

void validate(const StepperConfig& s) {
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ConfigError("time step must be positive");
    if (s.midpoint_iters < 1) throw ConfigError("midpoint iterations must be at least 1");
    if (!(s.max_field > 0.0)) throw ConfigError("divergence threshold must be positive");
}

Engine parse_engine(const std::string& s) {
    if (s == "direct") return Engine::direct;
    if (s == "spectral") return Engine::spectral;
    throw ConfigError("unknown engine '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
    if (s == "euler_ito" || s == "euler") return Scheme::euler_ito;
    if (s == "semi_implicit_midpoint_strat" || s == "midpoint") return Scheme::midpoint_strat;
    throw ConfigError("unknown scheme '" + s + "'");
}

struct Kernel::AdaptiveCache {
    MatrixXd W, U, U2;
    VectorXd u, ni;
    VectorXcd v, q, I3, I4, r, I5, I6;
};

namespace {

bool is_matrix_gauge(const GaugeConfig& g) {
    return g.diffusion == DiffusionGauge::nonlocal || g.diffusion == DiffusionGauge::numeric;
}

}  // namespace

Kernel::Kernel(const ModelSpec& model, const GaugeConfig& gauge)
    : model_(model), gauge_(gauge), M_(model.sites()), K_(model.modes()) {
    validate(gauge_, M_);
    omega_conj_ = model.omega.conjugate();
    flip_conj_ = model.omega_flip.conjugate();
    y1_ = y2_ = xa_ = xb_ = VectorXcd::Zero(M_);
    n_ = neff_ = wn_ = tmp_ = VectorXcd::Zero(M_);
    pdiag_ = VectorXd::Constant(M_, 2.0 * model.U0);
    if (gauge_.diffusion == DiffusionGauge::global) pdiag_ *= std::exp(-2.0 * gauge_.a);
    if (is_matrix_gauge(gauge_)) {
        if (!model.dense) throw ConfigError("matrix diffusion gauges need dense matrices");
        const MatrixXcd O = gauge_matrix(gauge_, M_);
        MatrixXcd S = MatrixXcd::Zero(2 * M_, 2 * M_);
        S.topLeftCorner(M_, M_) = -I * model.sqrtW;
        S.bottomRightCorner(M_, M_) = model.sqrtW;
        const MatrixXcd X = S * O;
        const MatrixXcd G = X * X.adjoint();
        for (int m = 0; m < M_; ++m)
            pdiag_[m] = (G(m, m) + G(m, m + M_) + G(m + M_, m) + G(m + M_, m + M_)).real();
    }
    if (gauge_.diffusion == DiffusionGauge::adaptive) {
        if (!(model.U0 > 0.0)) throw ConfigError("adaptive gauge needs interactions");
        adapt_ = std::make_shared<AdaptiveCache>();
        if (model.dense) {
            adapt_->W = model.W;
            adapt_->U = model.U;
        } else {
            if (M_ > 4096) throw ConfigError("adaptive gauge limited to 4096 sites");
            adapt_->W = circulant_from_row(model.lattice, model.w_row);
            adapt_->U = rectified_U(symmetric_sqrt(adapt_->W));
        }
        adapt_->U2 = adapt_->U.array().square().matrix();
    }
    mid_.alpha = VectorXcd::Zero(K_);
    mid_.beta = VectorXcd::Zero(K_);
    r_.dalpha = r_.dbeta = VectorXcd::Zero(K_);
}

void Kernel::matrix_noise(const double* xi, VectorXcd& xa, VectorXcd& xb) {
    const Eigen::Map<const VectorXd> x(xi, 2 * M_);
    const VectorXcd eta = gauge_matrix(gauge_, M_) * x.cast<cplx>();
    xa = -I * (model_.sqrtW * eta.head(M_));
    xb = model_.sqrtW * eta.tail(M_);
}

void Kernel::set_noise(const double* xi) {
    has_noise_ = xi != nullptr && model_.interacting();
    if (!has_noise_) return;
    if (is_matrix_gauge(gauge_)) {
        if (!supports_matrix_gauge()) throw ConfigError("engine does not support matrix diffusion gauges");
        matrix_noise(xi, xa_, xb_);
    } else {
        sqrtW_apply(xi, xi + M_, y1_, y2_);
    }
}

double Kernel::gauge_a(const TrajectoryState& s, double t) {
    switch (gauge_.diffusion) {
        case DiffusionGauge::global: return gauge_.a;
        case DiffusionGauge::adaptive: {
            AdaptiveCache& c = *adapt_;
            const VectorXcd n = s.alpha.head(M_).cwiseProduct(s.beta.head(M_));
            c.ni = n.imag();
            GaugeIntegrals g;
            g.U0 = model_.U0;
            g.I1 = c.ni.dot(c.U * c.ni);
            g.I2 = (n.transpose() * (c.U2 * n.conjugate()))(0).real();
            return a_adaptive(g, t, gauge_.t_fin);
        }
        default: return 0.0;
    }
}

void Kernel::add_drift(const TrajectoryState& s, double t, Rates& out) {
    if (model_.omega.nonZeros() > 0) {
        out.dalpha.noalias() += -I * (model_.omega * s.alpha);
        out.dbeta.noalias() += I * (omega_conj_ * s.beta);
    }
    if (model_.omega_flip.nonZeros() > 0) {
        const double sg = model_.flip_sign(t);
        out.dalpha.noalias() += (-I * sg) * (model_.omega_flip * s.alpha);
        out.dbeta.noalias() += (I * sg) * (flip_conj_ * s.beta);
    }
    if (!model_.interacting()) return;
    n_ = s.alpha.head(M_).cwiseProduct(s.beta.head(M_));
    if (gauge_.weighted())
        neff_ = n_.real().cast<cplx>();
    else
        neff_ = n_;
    interaction_field(neff_, wn_);
    out.dalpha.head(M_) += -I * s.alpha.head(M_).cwiseProduct(wn_);
    out.dbeta.head(M_) += I * s.beta.head(M_).cwiseProduct(wn_);
}

void Kernel::add_noise(const TrajectoryState& s, double t, Rates& out) {
    if (!has_noise_) return;
    if (!is_matrix_gauge(gauge_)) {
        const double a = gauge_a(s, t);
        const double c = std::cosh(a), sh = std::sinh(a);
        xa_ = (-I * c) * y1_ - sh * y2_;
        xb_ = (I * sh) * y1_ + c * y2_;
    }
    out.dalpha.head(M_) += SQRT_I * s.alpha.head(M_).cwiseProduct(xa_);
    out.dbeta.head(M_) += SQRT_I * s.beta.head(M_).cwiseProduct(xb_);
    if (gauge_.weighted()) {
        cplx w = 0.0;
        for (int m = 0; m < M_; ++m) w += (s.alpha[m] * s.beta[m]).imag() * (xa_[m] + xb_[m]);
        out.dlogOmega += I * SQRT_I * w;
    }
}

void Kernel::add_stratonovich(const TrajectoryState& s, double t, Rates& out) {
    if (!model_.interacting()) return;
    const double W0 = model_.W0;
    out.dalpha.head(M_) += (0.5 * I * W0) * s.alpha.head(M_);
    out.dbeta.head(M_) += (-0.5 * I * W0) * s.beta.head(M_);
    if (!gauge_.weighted()) return;
    n_ = s.alpha.head(M_).cwiseProduct(s.beta.head(M_));
    if (gauge_.diffusion != DiffusionGauge::adaptive) {
        out.dlogOmega += 0.25 * n_.dot(pdiag_.cast<cplx>());  // dot conjugates n
        return;
    }
    AdaptiveCache& c = *adapt_;
    const double U0 = model_.U0;
    const double tau = std::max(0.0, gauge_.t_fin - t);
    c.ni = n_.imag();
    const double I1 = c.ni.dot(c.U * c.ni);
    const double I2 = (n_.transpose() * (c.U2 * n_.conjugate()))(0).real();
    const double arg = 4.0 * I2 * tau / U0 + std::pow(1.0 + 4.0 * I1 / U0, 1.5);
    const double a_raw = arg > 0.0 ? std::log(arg) / 6.0 : -1.0;
    const double a = clamp_gauge(a_raw);
    out.dlogOmega += 0.5 * std::exp(-2.0 * a) * U0 * n_.conjugate().sum();
    if (a_raw <= 0.0 || a_raw >= kGaugeClampMax) return;

    const double e2 = std::exp(-2.0 * a), e6 = std::exp(-6.0 * a), e8 = std::exp(-8.0 * a);
    const double sq = std::sqrt(1.0 + 4.0 * I1 / U0);
    c.v = c.U2 * n_.conjugate();
    c.q = n_.cwiseProduct(c.v);
    c.I3 = c.W * c.q;
    c.I4 = c.U * c.q;
    c.u = c.U * c.ni;
    c.r = n_.cwiseProduct(c.u.cast<cplx>());
    c.I5 = c.W * c.r;
    c.I6 = c.U * c.r;
    cplx sl = 0.0;
    for (int m = 0; m < M_; ++m) {
        const cplx i4c = std::conj(c.I4[m]), i6c = std::conj(c.I6[m]);
        const cplx ta = (tau / 3.0) * (c.I3[m] - I * e2 * i4c) + 0.5 * sq * (-I * c.I5[m] + e2 * i6c);
        const cplx tb = (tau / 3.0) * (c.I3[m] + I * e2 * i4c) + 0.5 * sq * (-I * c.I5[m] - e2 * i6c);
        out.dalpha[m] += I * s.alpha[m] * e6 / U0 * ta;
        out.dbeta[m] += -I * s.beta[m] * e6 / U0 * tb;
        sl += c.ni[m] * ((2.0 * I * tau / 3.0) * i4c - sq * i6c);
    }
    out.dlogOmega += e8 / U0 * sl;
}

void Kernel::rates(const TrajectoryState& s, double t, bool strat, Rates& out) {
    out.dalpha.setZero(K_);
    out.dbeta.setZero(K_);
    out.dlogOmega = 0.0;
    add_drift(s, t, out);
    add_noise(s, t, out);
    if (strat) add_stratonovich(s, t, out);
}

namespace {

bool finite_state(const TrajectoryState& s, double max_field) {
    const double lim2 = max_field * max_field;
    for (Eigen::Index k = 0; k < s.alpha.size(); ++k) {
        const double a = std::norm(s.alpha[k]), b = std::norm(s.beta[k]);
        if (!(a <= lim2) || !(b <= lim2)) return false;
    }
    // the weight itself has to stay representable
    return s.logOmega.real() < 700.0 && std::isfinite(s.logOmega.imag());
}

}  // namespace

bool Kernel::advance(TrajectoryState& s, const StepperConfig& st, const double* xi, double t) {
    if (s.diverged) return false;
    const double dt = st.dt;
    set_noise(xi);
    if (st.scheme == Scheme::euler_ito) {
        rates(s, t, false, r_);
        s.alpha += dt * r_.dalpha;
        s.beta += dt * r_.dbeta;
        s.logOmega += dt * r_.dlogOmega;
    } else {
        const double h = 0.5 * dt, tm = t + h;
        mid_.alpha = s.alpha;
        mid_.beta = s.beta;
        mid_.logOmega = s.logOmega;
        for (int it = 0; it < st.midpoint_iters; ++it) {
            rates(mid_, tm, true, r_);
            mid_.alpha = s.alpha + h * r_.dalpha;
            mid_.beta = s.beta + h * r_.dbeta;
            mid_.logOmega = s.logOmega + h * r_.dlogOmega;
        }
        s.alpha = 2.0 * mid_.alpha - s.alpha;
        s.beta = 2.0 * mid_.beta - s.beta;
        s.logOmega = 2.0 * mid_.logOmega - s.logOmega;
    }
    s.t = t + dt;
    if (!finite_state(s, st.max_field)) {
        s.diverged = true;
        return false;
    }
    return true;
}

DirectKernel::DirectKernel(const ModelSpec& model, const GaugeConfig& gauge) : Kernel(model, gauge) {
    if (!model.dense) throw ConfigError("direct engine needs dense interaction matrices");
    W_ = model.W;
    sqrtW_ = model.sqrtW;
    real_root_ = sqrtW_.imag().cwiseAbs().maxCoeff() == 0.0;
    if (real_root_) sqrtW_real_ = sqrtW_.real();
    r1_ = r2_ = VectorXd::Zero(M_);
}

void DirectKernel::interaction_field(const VectorXcd& n, VectorXcd& out) { out.noalias() = W_ * n; }

void DirectKernel::sqrtW_apply(const double* xi1, const double* xi2, VectorXcd& y1, VectorXcd& y2) {
    const Eigen::Map<const VectorXd> a(xi1, M_), b(xi2, M_);
    if (real_root_) {
        r1_.noalias() = sqrtW_real_ * a;
        r2_.noalias() = sqrtW_real_ * b;
        y1 = r1_.cast<cplx>();
        y2 = r2_.cast<cplx>();
    } else {
        y1.noalias() = sqrtW_ * a.cast<cplx>();
        y2.noalias() = sqrtW_ * b.cast<cplx>();
    }
}

std::unique_ptr<Kernel> make_kernel(const ModelSpec& model, const GaugeConfig& gauge, Engine engine) {
    if (engine == Engine::spectral) return std::make_unique<SpectralKernel>(model, gauge);
    return std::make_unique<DirectKernel>(model, gauge);
}

namespace {

Rates zero_rates(const ModelSpec& model) {
    Rates r;
    r.dalpha = r.dbeta = VectorXcd::Zero(model.modes());
    return r;
}

}  // namespace

Rates drift_positive_p(const TrajectoryState& s, const ModelSpec& model, double t) {
    DirectKernel k(model, GaugeConfig::positive_p());
    Rates r = zero_rates(model);
    k.add_drift(s, t, r);
    return r;
}

Rates drift_gauge_p(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge, double t) {
    DirectKernel k(model, gauge);
    Rates r = zero_rates(model);
    k.add_drift(s, t, r);
    return r;
}

Rates apply_noise(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge, const VectorXd& xi,
                  double t) {
    if (xi.size() != noise_count(model)) throw ConfigError("noise vector has the wrong length");
    DirectKernel k(model, gauge);
    Rates r = zero_rates(model);
    k.set_noise(xi.data());
    k.add_noise(s, t, r);
    return r;
}

Rates stratonovich_correction(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge, double t) {
    DirectKernel k(model, gauge);
    Rates r = zero_rates(model);
    k.add_stratonovich(s, t, r);
    return r;
}

TrajectoryState step(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge,
                     const StepperConfig& st, const VectorXd& xi) {
    validate(st);
    if (xi.size() != noise_count(model)) throw ConfigError("noise vector has the wrong length");
    DirectKernel k(model, gauge);
    TrajectoryState out = s;
    k.advance(out, st, xi.data(), s.t);
    return out;
}

namespace {

bool records_at(const Observable& o, double t) {
    if (o.only_at.empty()) return true;
    for (double x : o.only_at)
        if (std::abs(x - t) < 1e-9 * std::max(1.0, std::abs(t))) return true;
    return false;
}

struct BatchResult {
    std::vector<MomentAccumulator> moments;
    LogVarianceAccumulator logvar{1, 1};
    int diverged = 0;
};

}  // namespace

EnsembleSeries run_ensemble(const ModelSpec& model, const GaugeConfig& gauge, const StepperConfig& st,
                            int n_traj, std::uint64_t seed, const std::vector<double>& t_grid,
                            const std::vector<Observable>& observables, const RunOptions& opt) {
    const auto wall0 = std::chrono::steady_clock::now();
    validate(st);
    validate(gauge, model.sites());
    if (n_traj < 2) throw ConfigError("need at least two trajectories");
    if (t_grid.empty()) throw ConfigError("empty time grid");
    if (opt.phi.size() != model.modes()) throw ConfigError("initial amplitudes do not match the mode count");
    std::vector<long> grid_steps;
    for (double t : t_grid) {
        if (!(t >= 0.0)) throw ConfigError("time grid must be nonnegative");
        const long s = std::lround(t / st.dt);
        if (!grid_steps.empty() && s < grid_steps.back()) throw ConfigError("time grid must be increasing");
        grid_steps.push_back(s);
    }

    const int M = model.sites();
    const int N = n_traj;
    const int B = std::max(1, std::min(opt.batches, N));
    const int T = std::max(1, std::min(opt.threads, B));
    const int nz = noise_count(model);
    const double scale = 1.0 / std::sqrt(st.dt);

    std::vector<std::unique_ptr<Kernel>> kernels;
    for (int w = 0; w < T; ++w) kernels.push_back(make_kernel(model, gauge, opt.engine));

    EnsembleSeries out;
    for (const auto& o : observables) out.names.push_back(o.name);
    std::vector<TrajectoryState> traj(N, init_coherent(opt.phi));
    std::vector<BatchResult> results(B);
    long cur = 0;

    auto run_batch = [&](int b, int w, long target, const std::vector<bool>& rec) {
        Kernel& k = *kernels[w];
        std::vector<double> z(nz);
        const int j0 = static_cast<int>(static_cast<long>(b) * N / B);
        const int j1 = static_cast<int>(static_cast<long>(b + 1) * N / B);
        BatchResult& r = results[b];
        r.moments.clear();
        for (std::size_t o = 0; o < observables.size(); ++o)
            r.moments.emplace_back(rec[o] ? observables[o].moments : std::vector<ProductSpec>{});
        r.logvar = LogVarianceAccumulator(M, model.modes());
        r.diverged = 0;
        for (int j = j0; j < j1; ++j) {
            TrajectoryState& s = traj[j];
            const NormalStream rng(seed, static_cast<std::uint64_t>(j));
            for (long step = cur; step < target && !s.diverged; ++step) {
                rng.fill(static_cast<std::uint64_t>(step), z.data(), nz);
                for (double& v : z) v *= scale;
                k.advance(s, st, z.data(), step * st.dt);
            }
            if (s.diverged) {
                ++r.diverged;
                continue;
            }
            for (std::size_t o = 0; o < observables.size(); ++o)
                if (rec[o]) r.moments[o].add(s);
            r.logvar.add(s);
        }
    };

    double prevT = 0.0, prevV = 0.0;
    bool have_prev = false;
    for (std::size_t g = 0; g < grid_steps.size(); ++g) {
        const long target = grid_steps[g];
        const double tg = target * st.dt;
        std::vector<bool> rec(observables.size());
        for (std::size_t o = 0; o < observables.size(); ++o) rec[o] = records_at(observables[o], tg);
        if (T == 1) {
            for (int b = 0; b < B; ++b) run_batch(b, 0, target, rec);
        } else {
            std::atomic<int> next{0};
            std::vector<std::thread> pool;
            for (int w = 0; w < T; ++w)
                pool.emplace_back([&, w] {
                    for (int b = next++; b < B; b = next++) run_batch(b, w, target, rec);
                });
            for (auto& th : pool) th.join();
        }
        cur = target;

        SeriesPoint p;
        p.t = tg;
        LogVarianceAccumulator lv(M, model.modes());
        int div = 0;
        for (const auto& r : results) {
            lv.merge(r.logvar);
            div += r.diverged;
        }
        p.n_used = N - div;
        p.excluded_fraction = double(div) / N;
        if (p.n_used == 0) throw RunFailed("all trajectories diverged by t=" + std::to_string(tg));
        if (p.excluded_fraction > 1e-3) out.unreliable = true;
        p.V = lv.value();
        p.zero_exclusions = lv.zero_exclusions();
        p.recorded = rec;
        for (std::size_t o = 0; o < observables.size(); ++o) {
            ObservableEstimate e;
            e.mean = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
            e.stderr_ = std::numeric_limits<double>::quiet_NaN();
            if (rec[o]) {
                std::vector<MomentAccumulator> acc;
                acc.reserve(B);
                for (const auto& r : results) acc.push_back(r.moments[o]);
                try {
                    e = jackknife(acc, observables[o].combine);
                } catch (const DegenerateEstimate&) {
                    e.n_traj = p.n_used;
                }
            }
            p.estimates.push_back(e);
        }
        out.points.push_back(p);
        if (opt.halt_on_variance && p.V > opt.halt_V) {
            out.halted = true;
            if (have_prev && prevV <= opt.halt_V)
                out.t_sim_empirical = prevT + (opt.halt_V - prevV) * (tg - prevT) / (p.V - prevV);
            else
                out.t_sim_empirical = tg;
            break;
        }
        prevT = tg;
        prevV = p.V;
        have_prev = true;
    }
    out.final_state.trajectories = std::move(traj);
    out.final_state.masterSeed = seed;
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return out;
}

}  // namespace gaugep
