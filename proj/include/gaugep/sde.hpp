#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gaugep/analytics.hpp"
#include "gaugep/gauges.hpp"
#include "gaugep/model.hpp"
#include "gaugep/phasespace.hpp"

namespace gaugep {

enum class Scheme { euler_ito, midpoint_strat };
enum class Engine { direct, spectral };

struct StepperConfig {
    double dt = 1e-4;
    Scheme scheme = Scheme::midpoint_strat;
    int midpoint_iters = 3;
    double max_field = 1e15;
};

void validate(const StepperConfig& s);

// Time derivatives of (alpha, beta, log Omega).
struct Rates {
    VectorXcd dalpha, dbeta;
    cplx dlogOmega{0.0, 0.0};
};

// Deterministic parts only; t selects the sign of the flipped coupling.
Rates drift_positive_p(const TrajectoryState& s, const ModelSpec& model, double t = 0.0);
Rates drift_gauge_p(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge, double t = 0.0);
// xi: 2M real noises with variance 1/dt (first M feed O's first block)
Rates apply_noise(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge,
                  const VectorXd& xi, double t = 0.0);
Rates stratonovich_correction(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge,
                              double t = 0.0);

// Drift rates plus noise for one evaluation point. set_noise fixes the noise
// realisation for the current step.
class Kernel {
public:
    Kernel(const ModelSpec& model, const GaugeConfig& gauge);
    virtual ~Kernel() = default;

    // xi == nullptr switches the noise off
    void set_noise(const double* xi);
    void rates(const TrajectoryState& s, double t, bool strat, Rates& out);

    // exposed pieces, all added into out
    void add_drift(const TrajectoryState& s, double t, Rates& out);
    void add_noise(const TrajectoryState& s, double t, Rates& out);
    void add_stratonovich(const TrajectoryState& s, double t, Rates& out);

    double gauge_a(const TrajectoryState& s, double t);
    // one in-place step; false if the trajectory diverged
    bool advance(TrajectoryState& s, const StepperConfig& st, const double* xi, double t);
    const ModelSpec& model() const { return model_; }
    const GaugeConfig& gauge() const { return gauge_; }

protected:
    virtual void interaction_field(const VectorXcd& n, VectorXcd& out) = 0;
    // y1 = sqrtW xi1, y2 = sqrtW xi2
    virtual void sqrtW_apply(const double* xi1, const double* xi2, VectorXcd& y1, VectorXcd& y2) = 0;
    virtual bool supports_matrix_gauge() const { return true; }
    virtual void matrix_noise(const double* xi, VectorXcd& xa, VectorXcd& xb);

    const ModelSpec& model_;
    GaugeConfig gauge_;
    int M_ = 0, K_ = 0;
    SparseC omega_conj_, flip_conj_;
    VectorXd pdiag_;  // diag of the block sum of S O O^dagger S^dagger, constant gauges
    bool has_noise_ = false;
    VectorXcd y1_, y2_, xa_, xb_, n_, neff_, wn_, tmp_;
    struct AdaptiveCache;
    std::shared_ptr<AdaptiveCache> adapt_;
    TrajectoryState mid_;
    Rates r_;
};

class DirectKernel final : public Kernel {
public:
    DirectKernel(const ModelSpec& model, const GaugeConfig& gauge);

protected:
    void interaction_field(const VectorXcd& n, VectorXcd& out) override;
    void sqrtW_apply(const double* xi1, const double* xi2, VectorXcd& y1, VectorXcd& y2) override;

private:
    MatrixXd W_;
    MatrixXcd sqrtW_;
    MatrixXd sqrtW_real_;
    bool real_root_ = false;
    VectorXd r1_, r2_;
};

std::unique_ptr<Kernel> make_kernel(const ModelSpec& model, const GaugeConfig& gauge, Engine engine);

TrajectoryState step(const TrajectoryState& s, const ModelSpec& model, const GaugeConfig& gauge,
                     const StepperConfig& st, const VectorXd& xi);

// Number of standard normals consumed per trajectory and step.
inline int noise_count(const ModelSpec& model) { return 2 * model.sites(); }

struct RunOptions {
    int threads = 1;
    Engine engine = Engine::direct;
    bool halt_on_variance = true;
    double halt_V = kVarianceLimit;
    int batches = 100;
    VectorXcd phi;  // coherent initial amplitudes over all modes
};

struct SeriesPoint {
    double t = 0.0;
    std::vector<ObservableEstimate> estimates;  // NaN mean when not recorded or degenerate
    std::vector<bool> recorded;
    double V = 0.0;
    double excluded_fraction = 0.0;
    int n_used = 0;
    long zero_exclusions = 0;
};

struct EnsembleSeries {
    std::vector<std::string> names;
    std::vector<SeriesPoint> points;
    bool halted = false;
    double t_sim_empirical = std::numeric_limits<double>::quiet_NaN();
    bool unreliable = false;
    double wall_seconds = 0.0;
    Ensemble final_state;
};

EnsembleSeries run_ensemble(const ModelSpec& model, const GaugeConfig& gauge, const StepperConfig& st,
                            int n_traj, std::uint64_t seed, const std::vector<double>& t_grid,
                            const std::vector<Observable>& observables, const RunOptions& opt);

Engine parse_engine(const std::string& s);
Scheme parse_scheme(const std::string& s);

}  // namespace gaugep
