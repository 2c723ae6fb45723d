#pragma once

#include "pdmp/metrics.hpp"
#include "pdmp/model.hpp"
#include "pdmp/switching.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pdmp {

enum class BoundKind { constant_rate, state_dependent, companion_mean };

const char* to_string(BoundKind kind);

/// Envelope values on a time grid, with every constant that entered them.
struct BoundCurve {
    BoundKind kind = BoundKind::constant_rate;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<double> times;
    std::vector<double> values;

    double constant(const std::string& name) const;
};

/// 2^{p+1} M^{p/q} C2(p) exp(-theta_p t / (1 + s theta_p / rho)) with s = q/(q-1).
/// theta_p and C2(p) are read from the report's entry for p.
/// Throws InvalidAssumption unless p < q < kappa.
BoundCurve constant_rate_envelope(const SpectralReport& spectral, double p, double q, double moment_bound,
                                  std::span<const double> times);

/// (1 + 2r)(1 + c t) exp(-alpha gamma t / (alpha + gamma)) with p = exp(-2 r kappa_lip / alpha).
BoundCurve nonconstant_envelope(double alpha, double b, double kappa_lip, double r, std::span<const double> times);

/// Rate b of the companion return clock: 2 a_lower for two modes, otherwise the exact
/// coalescence rate of the chain with every supported rate set to a_lower.
/// Throws InvalidAssumption above `max_modes` modes (the product chain has n(n-1) states).
double default_companion_rate(const SwitchedModel& model, int max_modes = 12);

/// Mean envelope of the companion process started at D.
BoundCurve companion_envelope(double D, double alpha, double b, double kappa, std::span<const double> times);

struct EnvelopeCheck {
    bool pass = true;
    std::vector<char> point_pass;
    /// max over the grid of empirical / envelope
    double worst_ratio = 0.0;
    int worst_index = -1;
};

/// Pass iff estimate <= envelope (1 + slack) + half_width at every grid point.
EnvelopeCheck envelope_check(const DistanceCurve& empirical, const BoundCurve& envelope, double slack = 0.02);

/// Evenly spaced grid of `points` times on [0, t_max], both ends included.
std::vector<double> linear_grid(double t_max, int points);

}  // namespace pdmp
