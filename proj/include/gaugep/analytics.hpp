#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gaugep/gauges.hpp"
#include "gaugep/model.hpp"

namespace gaugep {

constexpr double kVarianceLimit = 10.0;
constexpr double kVarianceAgreement = 0.2;

// First and second moments of the initial occupations (mode space, M entries).
struct InitialMoments {
    VectorXcd n;         // <n>
    MatrixXcd nn_conj;   // <n_k n*_k'>
    MatrixXd nii_nii;    // <n''_k n''_k'>
    static InitialMoments deterministic(const VectorXcd& n0);
};

enum class Method { gaugeP, positiveP, diffusionOnly };

double V_gaugeP(double t, const ModelSpec& model, const MatrixXcd& O, const InitialMoments& m,
                double V0 = 0.0);

// C0 = cov[n''_k, n''_k'];  C0t = cov[n''_k, log|beta_k'/alpha_k'|]   (zero when empty)
double V_positiveP(double t, const ModelSpec& model, const InitialMoments& m,
                   const MatrixXd& C0 = {}, const MatrixXd& C0t = {}, double V0 = 0.0);
// Diffusion-gauged positive-P with arbitrary constant O (2M x 2M).
double V_positiveP_general(double t, const ModelSpec& model, const MatrixXcd& O,
                           const InitialMoments& m, const MatrixXd& C0 = {},
                           const MatrixXd& C0t = {}, double V0 = 0.0);

double V_gaugeP_expanded(double t, const GaugeIntegrals& g, double a, double V0 = 0.0);
double V_positiveP_expanded(double t, const GaugeIntegrals& g, double V0 = 0.0);
double V_diffusionOnly_expanded(double t, const GaugeIntegrals& g, double a, double V0 = 0.0);

struct TsimEstimate {
    std::string regime;
    double t = std::numeric_limits<double>::infinity();
    std::string condition;
    bool applies = false;
};

std::vector<TsimEstimate> tsim(const GaugeIntegrals& g, Method method);
// The estimate of the regime that applies (or the smaller one if none is flagged).
double tsim_best(const GaugeIntegrals& g, Method method);

struct GaugeStrategy {
    bool diffusion_only_preferred = false;
    bool diffusion_gauge_useful = false;
    bool contact_heuristic_many_modes = false;
    double tsim_gaugeP = 0.0, tsim_positiveP = 0.0, tsim_diffusionOnly = 0.0;
};

GaugeStrategy gauge_strategy(const GaugeIntegrals& g, int M);

struct VarianceCurve {
    Method method;
    double a = 0.0;
    std::vector<double> t, V;
};

struct VarianceReport {
    GaugeIntegrals integrals;
    double a_gaugeP = 0.0;
    double a_diffusionOnly = 0.0;
    double t_opt = 0.0;
    std::map<std::string, std::vector<TsimEstimate>> tsim_estimates;
    GaugeStrategy strategy;
    std::vector<VarianceCurve> curves;
    bool linear_coupling_neglected = false;  // predictions are guidance only
};

VarianceReport analyze_variance(const ModelSpec& model, const VectorXcd& n0, double t_opt,
                                double t_max, int samples, double a_fixed = -1.0);

// (e^x - 1 - x)/x^2 and (e^x - 1 - x - x^2/2)/x^3 with their series near 0
cplx phi2(cplx x);
cplx phi3(cplx x);

const char* method_name(Method m);

}  // namespace gaugep
