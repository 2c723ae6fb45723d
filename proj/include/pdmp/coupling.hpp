#pragma once

#include "pdmp/model.hpp"

#include <span>
#include <utility>
#include <vector>

namespace pdmp {

enum class Phase { independent, merged };

const char* to_string(Phase phase);

/// State of the coupled pair. merged implies mode == mode_tilde.
struct CoupledState {
    Vec x;
    Vec x_tilde;
    ModeId mode = 0;
    ModeId mode_tilde = 0;
    Phase phase = Phase::independent;
};

/// Delta = |x - x~| + 1{i != i~}
double delta(const CoupledState& s);

enum class CoupledEventKind { start, flow_sample, single_jump, double_jump, merge, split, end };

const char* to_string(CoupledEventKind kind);

struct CoupledEvent {
    double t = 0.0;
    CoupledState state;
    CoupledEventKind kind = CoupledEventKind::flow_sample;
};

struct CoupledPath {
    std::vector<CoupledEvent> events;
    std::uint64_t seed = 0;
    double horizon = 0.0;

    /// Latest non-jump record at time t (within 1e-9 relative); RangeError if t was not recorded.
    const CoupledState& state_at(double t) const;
};

/// Synchronous coupling for constant rates: independent chains until they first meet,
/// one shared chain afterwards. `sample_times` must be sorted inside (0, horizon).
CoupledPath couple_constant(const SwitchedModel& model, const HybridState& z0, const HybridState& z0_tilde,
                            double horizon, std::span<const double> sample_times, Rng& rng,
                            bool record_jumps = true);

/// Merge/defect coupling for position-dependent rates, driven by one proposal clock
/// at twice the declared upper bound. Independent phase: each copy jumps at its own
/// rates. Merged phase: simultaneous jumps at sum_j min(a, a~), splitting jumps at the
/// positive and negative parts of a - a~.
CoupledPath couple_state_dependent(const SwitchedModel& model, const HybridState& z0,
                                   const HybridState& z0_tilde, double horizon,
                                   std::span<const double> sample_times, Rng& rng, bool record_jumps = true);

/// (t, Delta_t) at every recorded event.
std::vector<std::pair<double, double>> delta_process(const CoupledPath& path);

// Companion process U on [0, D] u {D + 1}: decays as u' = -alpha u on [0, D], jumps to
// D + 1 at hazard kappa * u, and returns to D after an Exp(b) holding time.

struct CompanionParams {
    double D = 2.0;
    double alpha = 1.0;
    double kappa = 1.0;
    double b = 2.0;
};

/// P(no jump ever | U0 = u) = exp(-kappa u / alpha).
double companion_escape_probability(double u, double kappa, double alpha);

/// First jump time from u by inversion of a unit exponential e1:
/// -(1/alpha) log(1 - alpha e1 / (kappa u)) when e1 < kappa u / alpha, +inf otherwise.
double companion_jump_time_from(double u, double kappa, double alpha, double e1);

/// First jump time from D.
double companion_jump_time(double D, double kappa, double alpha, Rng& rng);

/// CDF of the finite part of the first jump time from D:
/// (1 - exp(-(D kappa/alpha)(1 - e^{-alpha t}))) / (1 - exp(-D kappa/alpha)).
double companion_finite_cdf(double D, double kappa, double alpha, double t);

/// Jump points of U: (0, u0), then (t, D + 1) at every up-jump and (t, D) at every return.
struct CompanionPath {
    std::vector<std::pair<double, double>> jumps;
    double horizon = 0.0;
    double alpha = 1.0;
    double top = 3.0;

    double value_at(double t) const;
};

/// u0 must be in [0, D] or equal D + 1.
CompanionPath sample_companion(const CompanionParams& params, double u0, double horizon, Rng& rng);

struct GammaC {
    double gamma = 0.0;
    double c = 0.0;
};

/// gamma = ((alpha+b) - sqrt((alpha+b)^2 - 4 b p alpha)) / 2 and
/// c = alpha/(alpha+gamma) * e p alpha b / sqrt((alpha+b)^2 - 4 b p alpha).
/// Throws BoundaryError when the discriminant is not positive.
GammaC gamma_c_constants(double alpha, double b, double p);

/// Closed-form envelope of E(U_t | U_0 = D). Returns +inf in the degenerate
/// double-root limit (kappa = 0 and alpha = b), where the bound diverges.
double companion_mean_bound(double D, double alpha, double b, double kappa, double t);

}  // namespace pdmp
