#include "pdmp/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace pdmp {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::start: return "start";
        case EventKind::jump: return "jump";
        case EventKind::sample: return "sample";
        case EventKind::end: return "end";
    }
    return "?";
}

const TrajectoryEvent& Trajectory::nearest_sample(double t) const {
    if (t < 0.0 || t > horizon * (1.0 + 1e-12)) throw RangeError("time outside the simulated horizon");
    const TrajectoryEvent* best = nullptr;
    for (const auto& e : events) {
        if (e.kind == EventKind::jump) continue;
        if (!best || std::abs(e.t - t) < std::abs(best->t - t)) best = &e;
    }
    if (!best) throw RangeError("trajectory has no sample records");
    return *best;
}

int Trajectory::jump_count() const {
    return static_cast<int>(std::count_if(events.begin(), events.end(),
                                          [](const auto& e) { return e.kind == EventKind::jump; }));
}

double next_jump_time_constant(double lambda, Rng& rng) {
    if (lambda < 0.0) throw InvalidAssumption("negative jump rate");
    return rng.exponential(lambda);
}

double jump_time_from_unit_exponential(double lambda, double e1) {
    if (lambda <= 0.0) return kInf;
    return e1 / lambda;
}

namespace {

ModeId choose_target(const SwitchedModel& model, const Vec& y, ModeId i, Rng& rng) {
    const auto targets = model.targets(i);
    std::vector<double> w(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) w[k] = model.rate(y, i, targets[k]);
    return targets[rng.choose(w)];
}

// One RK4 step of the augmented system (x, l), l' = lambda(x, i).
void augmented_step(const SwitchedModel& model, ModeId i, const Vec& x, double ell, double h, Vec& x_out,
                    double& ell_out) {
    const VectorField& f = model.fields[i];
    const Vec k1 = f(x);
    const double l1 = model.total_rate(x, i);
    const Vec x2 = x + 0.5 * h * k1;
    const Vec k2 = f(x2);
    const double l2 = model.total_rate(x2, i);
    const Vec x3 = x + 0.5 * h * k2;
    const Vec k3 = f(x3);
    const double l3 = model.total_rate(x3, i);
    const Vec x4 = x + h * k3;
    const Vec k4 = f(x4);
    const double l4 = model.total_rate(x4, i);
    x_out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ell_out = ell + (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    if (!x_out.allFinite() || !std::isfinite(ell_out))
        throw IntegrationDiverged("augmented flow produced a non-finite value");
}

}  // namespace

JumpDraw next_jump_time_inversion(const SwitchedModel& model, const Vec& x, ModeId i, double max_time,
                                  Rng& rng) {
    const double e1 = rng.unit_exponential();
    return next_jump_time_inversion(model, x, i, max_time, e1, rng);
}

JumpDraw next_jump_time_inversion(const SwitchedModel& model, const Vec& x, ModeId i, double max_time,
                                  double e1, Rng& rng) {
    const double h_nominal = model.integrator.step;
    double t = 0.0;
    double ell = 0.0;
    Vec y = x;
    Vec y_next(x.size());
    double ell_next = 0.0;
    while (t < max_time) {
        const double h = std::min(h_nominal, max_time - t);
        augmented_step(model, i, y, ell, h, y_next, ell_next);
        if (ell_next >= e1) {
            double lo = 0.0;
            double hi = h;
            Vec y_mid(x.size());
            double ell_mid = 0.0;
            while (hi - lo > 1e-10 * (t + h)) {
                const double mid = 0.5 * (lo + hi);
                augmented_step(model, i, y, ell, mid, y_mid, ell_mid);
                if (ell_mid >= e1)
                    hi = mid;
                else
                    lo = mid;
            }
            augmented_step(model, i, y, ell, hi, y_mid, ell_mid);
            JumpDraw draw;
            draw.time = t + hi;
            draw.x = y_mid;
            draw.target = choose_target(model, y_mid, i, rng);
            return draw;
        }
        y.swap(y_next);
        ell = ell_next;
        t += h;
    }
    JumpDraw none;
    none.x = y;
    return none;
}

JumpDraw next_jump_thinning(const SwitchedModel& model, const Vec& x, ModeId i, double max_time, Rng& rng) {
    const double bound = model.constant_rates() ? model.total_rate(x, i) : model.state_rates().upper_bound;
    const VectorField& field = model.fields[i];
    double t = 0.0;
    Vec y = x;
    while (true) {
        const double tau = rng.exponential(bound);
        if (!(t + tau < max_time)) {
            JumpDraw none;
            none.x = flow_step(field, y, max_time - t, model.integrator);
            return none;
        }
        y = flow_step(field, y, tau, model.integrator);
        t += tau;
        const double lambda = model.total_rate(y, i);
        if (lambda > bound * (1.0 + 1e-12))
            throw BoundViolation("jump rate " + std::to_string(lambda) + " exceeds the declared bound " +
                                 std::to_string(bound));
        if (rng.uniform() * bound < lambda) {
            JumpDraw draw;
            draw.time = t;
            draw.x = y;
            draw.target = choose_target(model, y, i, rng);
            return draw;
        }
    }
}

std::vector<double> sample_grid(double horizon, double sample_dt) {
    std::vector<double> times;
    if (!(sample_dt > 0.0)) return times;
    for (long k = 1;; ++k) {
        const double t = static_cast<double>(k) * sample_dt;
        if (!(t < horizon * (1.0 - 1e-12))) break;
        times.push_back(t);
    }
    return times;
}

namespace {

// Records samples in (t0, t1] along the flow of `field` from (t0, x0).
void record_segment(const SwitchedModel& model, ModeId mode, const Vec& x0, double t0, double t1,
                    std::span<const double> sample_times, std::size_t& next, Trajectory& traj) {
    while (next < sample_times.size() && sample_times[next] <= t1) {
        const double s = sample_times[next++];
        if (s <= t0) continue;
        traj.events.push_back({s, flow_step(model.fields[mode], x0, s - t0, model.integrator), mode,
                               EventKind::sample});
    }
}

void check_inputs(const SwitchedModel& model, const HybridState& z0, double horizon) {
    if (!(horizon >= 0.0)) throw RangeError("negative horizon");
    if (z0.x.size() != model.dim) throw InvalidAssumption("initial point has the wrong dimension");
    if (!z0.x.allFinite()) throw InvalidAssumption("initial point is not finite");
    if (z0.mode < 0 || z0.mode >= model.modes()) throw InvalidAssumption("initial mode out of range");
}

Trajectory simulate_state_dependent(const SwitchedModel& model, const HybridState& z0, double horizon,
                                    std::span<const double> sample_times, Rng& rng, bool record_jumps) {
    Trajectory traj;
    traj.seed = rng.seed();
    traj.horizon = horizon;
    traj.events.push_back({0.0, z0.x, z0.mode, EventKind::start});
    double t = 0.0;
    Vec x = z0.x;
    ModeId i = z0.mode;
    std::size_t next = 0;
    while (true) {
        const JumpDraw draw = model.sampler == JumpSampler::inversion
                                  ? next_jump_time_inversion(model, x, i, horizon - t, rng)
                                  : next_jump_thinning(model, x, i, horizon - t, rng);
        if (!std::isfinite(draw.time)) {
            record_segment(model, i, x, t, horizon, sample_times, next, traj);
            traj.events.push_back({horizon, draw.x, i, EventKind::end});
            return traj;
        }
        record_segment(model, i, x, t, t + draw.time, sample_times, next, traj);
        t += draw.time;
        x = draw.x;
        i = draw.target;
        if (record_jumps) traj.events.push_back({t, x, i, EventKind::jump});
    }
}

}  // namespace

Trajectory reconstruct(const SwitchedModel& model, const DiscretePath& path, const Vec& x0,
                       std::span<const double> sample_times, bool record_jumps) {
    Trajectory traj;
    traj.horizon = path.horizon;
    traj.events.push_back({0.0, x0, path.modes.front(), EventKind::start});
    Vec x = x0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        const double t0 = path.times[k];
        const double t1 = k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
        const ModeId mode = path.modes[k];
        record_segment(model, mode, x, t0, t1, sample_times, next, traj);
        x = flow_step(model.fields[mode], x, t1 - t0, model.integrator);
        if (k + 1 < path.times.size()) {
            if (record_jumps) traj.events.push_back({t1, x, path.modes[k + 1], EventKind::jump});
        } else {
            traj.events.push_back({path.horizon, x, mode, EventKind::end});
        }
    }
    return traj;
}

Trajectory simulate(const SwitchedModel& model, const HybridState& z0, double horizon,
                    std::span<const double> sample_times, Rng& rng, bool record_jumps) {
    check_inputs(model, z0, horizon);
    if (!model.constant_rates())
        return simulate_state_dependent(model, z0, horizon, sample_times, rng, record_jumps);
    const DiscretePath path = sample_ctmc_path(model.generator(), z0.mode, horizon, rng);
    Trajectory traj = reconstruct(model, path, z0.x, sample_times, record_jumps);
    traj.seed = rng.seed();
    return traj;
}

Trajectory simulate(const SwitchedModel& model, const HybridState& z0, double horizon, double sample_dt,
                    Rng& rng) {
    const auto times = sample_grid(horizon, sample_dt);
    return simulate(model, z0, horizon, times, rng, true);
}

Trajectory simulate_joint(const SwitchedModel& model, const HybridState& z0, double horizon,
                          std::span<const double> sample_times, Rng& rng) {
    check_inputs(model, z0, horizon);
    if (!model.constant_rates()) throw InvalidAssumption("simulate_joint needs constant rates");
    const SwitchGenerator& gen = model.generator();
    const Vec lambda = gen.total_rates();
    Trajectory traj;
    traj.seed = rng.seed();
    traj.horizon = horizon;
    traj.events.push_back({0.0, z0.x, z0.mode, EventKind::start});
    double t = 0.0;
    Vec x = z0.x;
    ModeId i = z0.mode;
    std::size_t next = 0;
    while (true) {
        const double hold = rng.exponential(lambda(i));
        const double t1 = t + hold < horizon ? t + hold : horizon;
        record_segment(model, i, x, t, t1, sample_times, next, traj);
        x = flow_step(model.fields[i], x, t1 - t, model.integrator);
        if (!(t + hold < horizon)) {
            traj.events.push_back({horizon, x, i, EventKind::end});
            return traj;
        }
        t = t1;
        i = sample_jump_target(gen, i, rng);
        traj.events.push_back({t, x, i, EventKind::jump});
    }
}

McEstimate jackknife_mean(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw RangeError("no values");
    double sum = 0.0;
    for (double v : values) sum += v;
    McEstimate est;
    est.mean = sum / n;
    if (n < 2) return est;
    // leave-one-out means (sum - v_i)/(n-1) average back to the full mean
    double acc = 0.0;
    for (double v : values) {
        const double loo = (sum - v) / (n - 1.0);
        acc += (loo - est.mean) * (loo - est.mean);
    }
    est.std_error = std::sqrt((n - 1.0) / n * acc);
    return est;
}

McEstimate moment_estimate(std::span<const Trajectory> trajectories, double q, double t) {
    if (trajectories.empty()) throw RangeError("no trajectories");
    std::vector<double> values;
    values.reserve(trajectories.size());
    for (const auto& traj : trajectories) values.push_back(std::pow(traj.nearest_sample(t).x.norm(), q));
    return jackknife_mean(values);
}

}  // namespace pdmp
