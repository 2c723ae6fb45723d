#pragma once

#include "pdmp/model.hpp"

#include <array>
#include <vector>

namespace pdmp {

/// Two modes with fields -alpha (x - i a) and constant rates lambda0 (0 -> 1), lambda1 (1 -> 0).
SwitchedModel toy_model(double lambda0 = 1.0, double lambda1 = 1.0, double alpha = 1.0,
                        const Vec& a = Vec::Unit(2, 0));

/// Same fields with position-dependent rates a(x,0,1) = base + amplitude sin(x_0),
/// a(x,1,0) = base + amplitude cos(x_0). Declared constants: lower base - amplitude,
/// upper base + amplitude, Lipschitz amplitude. amplitude = 0 gives constant rates
/// in state-dependent form.
SwitchedModel toy_state_dependent_model(double alpha = 1.0, const Vec& a = Vec::Unit(1, 0), double base = 1.0,
                                        double amplitude = 0.4);

/// Stochastic Morris-Lecar neuron with K channels of each of two types.
/// Illustrative defaults (voltages shifted by +85 so that the invariant segment starts at 0).
struct MorrisLecarParams {
    double C = 20.0;
    double I_in = 100.0;
    std::array<double, 3> g{4.4, 8.0, 2.0};
    std::array<double, 3> V_eq{205.0, 1.0, 25.0};
    std::array<double, 2> c{0.1, 0.04};
    std::array<double, 2> V_half{83.8, 87.0};
    std::array<double, 2> V_slope{18.0, 30.0};
    int K = 10;

    void validate(int k_cap = 32) const;
    /// Upper end of the invariant segment [0, V_max].
    double v_max() const;
};

struct MorrisLecarRates {
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double alpha2 = 0.0;
    double beta2 = 0.0;
};

MorrisLecarRates ml_rates(double V, const MorrisLecarParams& params);

/// Mode index k1 (K+1) + k2 for channel proportions (k1/K, k2/K).
inline int ml_mode(int k1, int k2, int K) { return k1 * (K + 1) + k2; }

/// d = 1, (K+1)^2 modes, uniform alpha = g3 / C. Rate constants come from a grid
/// audit over the invariant segment with safety margins.
SwitchedModel morris_lecar_model(const MorrisLecarParams& params, int k_cap = 32);

/// Stationary law of a two-mode 1-d model with contracting affine fields and constant rates.
struct StationaryDensity {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> grid;
    std::vector<double> cdf;

    /// Marginal density of X (both modes summed); zero outside (lo, hi).
    double density(double x) const;
    /// Partial density of mode i.
    double partial(int i, double x) const;
    double quantile(double u) const;
    /// n quantiles at (k + 1/2) / n.
    std::vector<double> quantile_samples(int n) const;

    // set up by stationary_density_1d
    double m0 = 0.0, v0 = 0.0, m1 = 0.0, v1 = 0.0, lambda0 = 0.0, lambda1 = 0.0;
    double mid = 0.5;
    double norm = 1.0;
};

/// Zero-flux stationary solution: q = F0 p0 = -F1 p1 solves q' = -(lambda0/F0 + lambda1/F1) q,
/// solved in closed form for affine fields; the CDF table comes from tanh-sinh quadrature.
StationaryDensity stationary_density_1d(const SwitchedModel& model, int cdf_points = 2000);

}  // namespace pdmp
