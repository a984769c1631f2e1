#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gaugep/common.hpp"

namespace gaugep {

struct TrajectoryState {
    VectorXcd alpha;
    VectorXcd beta;
    cplx logOmega{0.0, 0.0};
    double t = 0.0;
    bool diverged = false;

    int modes() const { return static_cast<int>(alpha.size()); }
    cplx occupation(int m) const { return alpha[m] * beta[m]; }
};

TrajectoryState init_coherent(const VectorXcd& phi);

struct Ensemble {
    std::vector<TrajectoryState> trajectories;
    std::uint64_t masterSeed = 0;
    int count() const { return static_cast<int>(trajectories.size()); }
};

struct ObservableEstimate {
    cplx mean{0.0, 0.0};
    double stderr_ = 0.0;
    int n_traj = 0;
};

// Normally ordered product  a†_{create...} a_{annihilate...}
struct ProductSpec {
    std::vector<int> create;
    std::vector<int> annihilate;
};

// A derived observable is a function of several normally ordered moments; its
// error comes from jackknifing the whole function over trajectory batches.
struct Observable {
    std::string name;
    std::vector<ProductSpec> moments;
    std::function<cplx(std::span<const cplx>)> combine;
    std::vector<double> only_at;  // empty: record at every grid time
};

Observable moment_observable(std::string name, ProductSpec p);
// site-averaged <a_n> over the first `sites` modes starting at `offset`
Observable mean_field_observable(int sites, int offset = 0);
Observable density_observable(int sites, int offset = 0);      // site-averaged <a†a>
Observable total_number_observable(int sites, int offset = 0); // sum of <a†a>
Observable g1_observable(int sites, int dn);
Observable g2_observable(int sites, int r, int offset = 0, std::vector<double> only_at = {});

// Per-batch sums of the estimator numerators/denominator for a moment list.
class MomentAccumulator {
public:
    explicit MomentAccumulator(std::vector<ProductSpec> moments);

    void add(const TrajectoryState& s);
    void merge(const MomentAccumulator& o);
    int count() const { return n_; }
    const std::vector<cplx>& numerators() const { return num_; }
    double denominator() const { return den_; }
    const std::vector<ProductSpec>& moments() const { return moments_; }

private:
    std::vector<ProductSpec> moments_;
    std::vector<cplx> num_;
    double den_ = 0.0;
    int n_ = 0;
};

// Per-component running mean/variance of log|Omega gamma_mu| over the first
// 2*interacting_modes variables (alpha then beta of the interacting field).
class LogVarianceAccumulator {
public:
    LogVarianceAccumulator(int interacting_modes, int total_modes);

    void add(const TrajectoryState& s);
    void merge(const LogVarianceAccumulator& o);
    double value() const;  // (1/2M) sum var
    long zero_exclusions() const { return zeros_; }

private:
    int M_, K_;
    std::vector<double> n_, mean_, m2_;
    long zeros_ = 0;
};

// Jackknife over batches for f applied to per-batch moment estimates.
ObservableEstimate jackknife(const std::vector<MomentAccumulator>& batches,
                             const std::function<cplx(std::span<const cplx>)>& f);

ObservableEstimate estimate(const Ensemble& ens, const ProductSpec& p, int batches = 100);
ObservableEstimate estimate(const Ensemble& ens, const Observable& obs, int batches = 100);
ObservableEstimate g1(const Ensemble& ens, int sites, int dn, int batches = 100);
ObservableEstimate g2(const Ensemble& ens, int sites, int component, int r, int batches = 100);
double empirical_V(const Ensemble& ens, int interacting_modes, long* zero_exclusions = nullptr);

}  // namespace gaugep
