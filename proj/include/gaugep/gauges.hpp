#pragma once

#include <string>

#include "gaugep/model.hpp"
#include "gaugep/phasespace.hpp"

namespace gaugep {

enum class DriftGauge { none, standard };
enum class DiffusionGauge { none, global, adaptive, nonlocal, numeric };

struct GaugeConfig {
    DriftGauge drift = DriftGauge::none;
    DiffusionGauge diffusion = DiffusionGauge::none;
    double a = 0.0;      // global
    double t_fin = 0.0;  // adaptive
    MatrixXd A;          // nonlocal, M x M symmetric
    MatrixXcd O;         // numeric, 2M x 2M

    static GaugeConfig positive_p() { return {}; }
    static GaugeConfig gauge_p(double a);
    static GaugeConfig adaptive(double t_fin);
    static GaugeConfig diffusion_only(double a);
    static GaugeConfig nonlocal(const MatrixXd& A, bool drift);
    static GaugeConfig numeric(const MatrixXcd& O, bool drift);

    bool weighted() const { return drift == DriftGauge::standard; }
    std::string describe() const;
};

void validate(const GaugeConfig& g, int M);

constexpr double kGaugeClampMax = 10.0;
double clamp_gauge(double a);

// f = i Im(n), stacked (n, n)
VectorXcd drift_gauge_vector(const TrajectoryState& s, int interacting_modes);

VectorXcd apply_global_O(const VectorXd& xi, double a);
MatrixXcd global_O(int M, double a);
MatrixXcd local_O(const VectorXd& a);  // per-mode diagonal form
MatrixXcd nonlocal_O(const MatrixXd& A);
// Constant O of a gauge; the adaptive gauge has none.
MatrixXcd gauge_matrix(const GaugeConfig& g, int M);

struct GaugeIntegrals {
    double I1 = 0.0, I2 = 0.0, I1P = 0.0, I2P = 0.0, U0 = 0.0;
};

GaugeIntegrals gauge_integrals(const ModelSpec& model, const VectorXcd& n);

double a_approx(const GaugeIntegrals& g, double t_opt);
double a_adaptive(const GaugeIntegrals& g, double t, double t_fin);
double a_opt_diffusion_only(const GaugeIntegrals& g, double t_opt);

// Eigenvalue floor used for the pseudo-inverse of sqrt(W).
constexpr double kSqrtWFloor = 1e-12;
MatrixXd nonlocal_A(const ModelSpec& model, const VectorXd& n, double t_opt);
double nonlocal_A_residual(const ModelSpec& model, const VectorXd& n, double t_opt, const MatrixXd& A);

struct OptimizerOptions {
    int max_iterations = 400;
    double fd_step = 1e-5;
    double gtol = 1e-7;
    double ftol = 1e-12;
};

struct OptimizerResult {
    MatrixXcd O;
    MatrixXd h;  // O = exp(i h), h real antisymmetric
    double V_init = 0.0;
    double V_final = 0.0;
    int iterations = 0;
    bool converged = false;
};

constexpr int kOptimizerMaxModes = 64;
// V(t_opt) of the drift-gauged variance for a numeric O.
double gauge_objective(const ModelSpec& model, const VectorXcd& n0, double t_opt, const MatrixXcd& O);
// best scalar a of the global gauge, by direct 1D minimisation of the same objective
double a_best_global(const ModelSpec& model, const VectorXcd& n0, double t_opt);
MatrixXcd antisymmetric_exp(const MatrixXd& h);  // exp(i h)
OptimizerResult optimize_O_numeric(const ModelSpec& model, const VectorXcd& n0, double t_opt,
                                   const GaugeConfig& init, const OptimizerOptions& opt = {});

// zero-based: a(x_mu) = asinh Im O(M+mu, mu),  a(r_mu) = asinh Im O(M, mu)
VectorXd gauge_profile_local(const MatrixXcd& O);
VectorXd gauge_profile_nonlocal(const MatrixXcd& O);

}  // namespace gaugep
