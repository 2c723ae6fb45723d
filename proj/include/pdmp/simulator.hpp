#pragma once

#include "pdmp/model.hpp"

#include <span>
#include <vector>

namespace pdmp {

enum class EventKind { start, jump, sample, end };

const char* to_string(EventKind kind);

struct TrajectoryEvent {
    double t = 0.0;
    Vec x;
    ModeId mode = 0;
    EventKind kind = EventKind::sample;
};

/// Time-ordered record of one replica. A jump event carries the post-jump mode.
struct Trajectory {
    std::vector<TrajectoryEvent> events;
    std::uint64_t seed = 0;
    double horizon = 0.0;

    /// Start/sample/end record nearest to t. Throws RangeError for t outside [0, horizon].
    const TrajectoryEvent& nearest_sample(double t) const;
    int jump_count() const;
};

/// Exp(lambda) holding time; +inf when lambda == 0.
double next_jump_time_constant(double lambda, Rng& rng);

/// Inversion of a given unit-exponential draw: e1 / lambda.
double jump_time_from_unit_exponential(double lambda, double e1);

/// Outcome of a jump sampler. time == +inf means no jump before max_time; x is
/// then the flowed point at max_time and target is -1.
struct JumpDraw {
    double time = kInf;
    Vec x;
    ModeId target = -1;
};

/// Integrates (x' = F^i(x), l' = lambda(x, i)) with RK4 until l crosses an Exp(1)
/// draw; the crossing is refined by bisection inside the last step to 1e-10 relative.
JumpDraw next_jump_time_inversion(const SwitchedModel& model, const Vec& x, ModeId i, double max_time,
                                  Rng& rng);

/// Variant taking the Exp(1) threshold explicitly (no randomness consumed for it).
JumpDraw next_jump_time_inversion(const SwitchedModel& model, const Vec& x, ModeId i, double max_time,
                                  double e1, Rng& rng);

/// Proposals at the declared upper bound, accepted with probability lambda(y,i)/upper.
/// Throws BoundViolation when lambda(y,i) exceeds the bound.
JumpDraw next_jump_thinning(const SwitchedModel& model, const Vec& x, ModeId i, double max_time, Rng& rng);

/// Sample times k * sample_dt strictly inside (0, horizon).
std::vector<double> sample_grid(double horizon, double sample_dt);

/// Start event at 0, a sample at every grid time, every jump, end event at horizon.
/// Constant-rate models draw the discrete chain first and reconstruct X from it.
Trajectory simulate(const SwitchedModel& model, const HybridState& z0, double horizon, double sample_dt,
                    Rng& rng);

/// Same with explicit sample times (sorted, inside (0, horizon)); jump records optional.
Trajectory simulate(const SwitchedModel& model, const HybridState& z0, double horizon,
                    std::span<const double> sample_times, Rng& rng, bool record_jumps = true);

/// Constant-rate models only: interleaves chain draws and flow segments. Consumes the
/// generator exactly as sample_ctmc_path does, so it reproduces simulate() bit for bit.
Trajectory simulate_joint(const SwitchedModel& model, const HybridState& z0, double horizon,
                          std::span<const double> sample_times, Rng& rng);

/// Deterministic X along a given discrete path.
Trajectory reconstruct(const SwitchedModel& model, const DiscretePath& path, const Vec& x0,
                       std::span<const double> sample_times, bool record_jumps = true);

/// Mean of |X_t|^q over replicas at the recorded time nearest t, with jackknife error.
McEstimate moment_estimate(std::span<const Trajectory> trajectories, double q, double t);

/// Jackknife standard error of the mean of `values` together with the mean.
McEstimate jackknife_mean(std::span<const double> values);

}  // namespace pdmp
