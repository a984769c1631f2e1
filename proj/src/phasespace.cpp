#include "gaugep/phasespace.hpp"

#include <cmath>
#include <limits>

namespace gaugep {

TrajectoryState init_coherent(const VectorXcd& phi) {
    TrajectoryState s;
    s.alpha = phi;
    s.beta = phi.conjugate();
    return s;
}

Observable moment_observable(std::string name, ProductSpec p) {
    Observable o;
    o.name = std::move(name);
    o.moments.push_back(std::move(p));
    o.combine = [](std::span<const cplx> v) { return v[0]; };
    return o;
}

Observable mean_field_observable(int sites, int offset) {
    Observable o;
    o.name = "mean_field";
    for (int n = 0; n < sites; ++n) o.moments.push_back({{}, {offset + n}});
    o.combine = [sites](std::span<const cplx> v) {
        cplx s = 0.0;
        for (int n = 0; n < sites; ++n) s += v[n];
        return s / double(sites);
    };
    return o;
}

Observable density_observable(int sites, int offset) {
    Observable o;
    o.name = "density";
    for (int n = 0; n < sites; ++n) o.moments.push_back({{offset + n}, {offset + n}});
    o.combine = [sites](std::span<const cplx> v) {
        cplx s = 0.0;
        for (int n = 0; n < sites; ++n) s += v[n];
        return s / double(sites);
    };
    return o;
}

Observable total_number_observable(int sites, int offset) {
    Observable o = density_observable(sites, offset);
    o.name = "number";
    o.combine = [sites](std::span<const cplx> v) {
        cplx s = 0.0;
        for (int n = 0; n < sites; ++n) s += v[n];
        return s;
    };
    return o;
}

Observable g1_observable(int sites, int dn) {
    Observable o;
    o.name = "g1_" + std::to_string(dn);
    for (int n = 0; n < sites; ++n) o.moments.push_back({{n}, {((n + dn) % sites + sites) % sites}});
    for (int n = 0; n < sites; ++n) o.moments.push_back({{n}, {n}});
    o.combine = [sites, dn](std::span<const cplx> v) {
        cplx s = 0.0;
        for (int n = 0; n < sites; ++n) {
            const int m = ((n + dn) % sites + sites) % sites;
            const double a = v[sites + n].real(), b = v[sites + m].real();
            if (!(a > 0.0) || !(b > 0.0)) return cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
            s += v[n] / std::sqrt(a * b);
        }
        return s / double(sites);
    };
    return o;
}

Observable g2_observable(int sites, int r, int offset, std::vector<double> only_at) {
    Observable o;
    o.name = "g2_" + std::to_string(r);
    o.only_at = std::move(only_at);
    for (int x = 0; x < sites; ++x) {
        const int y = offset + ((x + r) % sites + sites) % sites;
        o.moments.push_back({{offset + x, y}, {y, offset + x}});
    }
    for (int x = 0; x < sites; ++x) o.moments.push_back({{offset + x}, {offset + x}});
    // ratio of spatial averages, homogeneous systems
    o.combine = [sites](std::span<const cplx> v) {
        cplx num = 0.0;
        double den = 0.0;
        for (int x = 0; x < sites; ++x) {
            num += v[x];
            den += v[sites + x].real();
        }
        if (!(den > 0.0)) return cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        return num * double(sites) / (den * den);
    };
    return o;
}

MomentAccumulator::MomentAccumulator(std::vector<ProductSpec> moments)
    : moments_(std::move(moments)), num_(moments_.size(), cplx(0.0, 0.0)) {}

void MomentAccumulator::add(const TrajectoryState& s) {
    if (s.diverged) return;
    const cplx w = std::exp(s.logOmega);
    const cplx wc = std::conj(w);
    for (std::size_t k = 0; k < moments_.size(); ++k) {
        const ProductSpec& p = moments_[k];
        cplx x = w, y = wc;
        for (int c : p.create) {
            x *= s.beta[c];
            y *= std::conj(s.alpha[c]);
        }
        for (int a : p.annihilate) {
            x *= s.alpha[a];
            y *= std::conj(s.beta[a]);
        }
        num_[k] += x + y;
    }
    den_ += 2.0 * w.real();
    ++n_;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
    for (std::size_t k = 0; k < num_.size(); ++k) num_[k] += o.num_[k];
    den_ += o.den_;
    n_ += o.n_;
}

LogVarianceAccumulator::LogVarianceAccumulator(int interacting_modes, int total_modes)
    : M_(interacting_modes), K_(total_modes), n_(2 * interacting_modes, 0.0),
      mean_(2 * interacting_modes, 0.0), m2_(2 * interacting_modes, 0.0) {}

void LogVarianceAccumulator::add(const TrajectoryState& s) {
    if (s.diverged) return;
    const double lw = s.logOmega.real();
    for (int mu = 0; mu < 2 * M_; ++mu) {
        const cplx g = mu < M_ ? s.alpha[mu] : s.beta[mu - M_];
        if (g == cplx(0.0, 0.0)) {
            ++zeros_;
            continue;
        }
        const double x = lw + std::log(std::abs(g));
        n_[mu] += 1.0;
        const double d = x - mean_[mu];
        mean_[mu] += d / n_[mu];
        m2_[mu] += d * (x - mean_[mu]);
    }
}

void LogVarianceAccumulator::merge(const LogVarianceAccumulator& o) {
    for (int mu = 0; mu < 2 * M_; ++mu) {
        const double na = n_[mu], nb = o.n_[mu];
        if (nb == 0.0) continue;
        if (na == 0.0) {
            n_[mu] = nb;
            mean_[mu] = o.mean_[mu];
            m2_[mu] = o.m2_[mu];
            continue;
        }
        const double n = na + nb, d = o.mean_[mu] - mean_[mu];
        mean_[mu] += d * nb / n;
        m2_[mu] += o.m2_[mu] + d * d * na * nb / n;
        n_[mu] = n;
    }
    zeros_ += o.zeros_;
}

double LogVarianceAccumulator::value() const {
    double s = 0.0;
    for (int mu = 0; mu < 2 * M_; ++mu)
        if (n_[mu] > 1.0) s += m2_[mu] / (n_[mu] - 1.0);
    return s / (2.0 * M_);
}

ObservableEstimate jackknife(const std::vector<MomentAccumulator>& batches,
                             const std::function<cplx(std::span<const cplx>)>& f) {
    if (batches.empty()) throw DegenerateEstimate("no batches");
    const std::size_t K = batches.front().numerators().size();
    std::vector<cplx> tot(K, cplx(0.0, 0.0));
    double den = 0.0;
    int n = 0, used = 0;
    for (const auto& b : batches) {
        for (std::size_t k = 0; k < K; ++k) tot[k] += b.numerators()[k];
        den += b.denominator();
        n += b.count();
        if (b.count() > 0) ++used;
    }
    ObservableEstimate e;
    e.n_traj = n;
    if (n == 0 || !(std::abs(den) > 1e-12 * n)) throw DegenerateEstimate("weight sum indistinguishable from zero");
    std::vector<cplx> v(K);
    for (std::size_t k = 0; k < K; ++k) v[k] = tot[k] / den;
    e.mean = f(v);
    if (used < 2) {
        e.stderr_ = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    std::vector<cplx> loo;
    loo.reserve(used);
    cplx avg = 0.0;
    for (const auto& b : batches) {
        if (b.count() == 0) continue;
        const double d = den - b.denominator();
        for (std::size_t k = 0; k < K; ++k) v[k] = (tot[k] - b.numerators()[k]) / d;
        loo.push_back(f(v));
        avg += loo.back();
    }
    avg /= double(used);
    double var = 0.0;
    for (const cplx& x : loo) var += std::norm(x - avg);
    e.stderr_ = std::sqrt(var * (used - 1.0) / used);
    return e;
}

namespace {

std::vector<MomentAccumulator> batch_moments(const Ensemble& ens, const std::vector<ProductSpec>& m,
                                             int batches) {
    const int N = ens.count();
    if (N == 0) throw DegenerateEstimate("empty ensemble");
    const int B = std::max(1, std::min(batches, N));
    std::vector<MomentAccumulator> acc(B, MomentAccumulator(m));
    for (int j = 0; j < N; ++j) acc[static_cast<long>(j) * B / N].add(ens.trajectories[j]);
    return acc;
}

}  // namespace

ObservableEstimate estimate(const Ensemble& ens, const Observable& obs, int batches) {
    ObservableEstimate e = jackknife(batch_moments(ens, obs.moments, batches), obs.combine);
    if (!std::isfinite(e.mean.real())) throw DegenerateEstimate(obs.name + ": normalization is not positive");
    return e;
}

ObservableEstimate estimate(const Ensemble& ens, const ProductSpec& p, int batches) {
    return estimate(ens, moment_observable("moment", p), batches);
}

ObservableEstimate g1(const Ensemble& ens, int sites, int dn, int batches) {
    return estimate(ens, g1_observable(sites, dn), batches);
}

ObservableEstimate g2(const Ensemble& ens, int sites, int component, int r, int batches) {
    return estimate(ens, g2_observable(sites, r, component * sites), batches);
}

double empirical_V(const Ensemble& ens, int interacting_modes, long* zero_exclusions) {
    if (ens.count() == 0) throw DegenerateEstimate("empty ensemble");
    LogVarianceAccumulator acc(interacting_modes, ens.trajectories.front().modes());
    for (const auto& s : ens.trajectories) acc.add(s);
    if (zero_exclusions) *zero_exclusions = acc.zero_exclusions();
    return acc.value();
}

}  // namespace gaugep
