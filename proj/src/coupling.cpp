#include "pdmp/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace pdmp {

const char* to_string(Phase phase) { return phase == Phase::merged ? "merged" : "independent"; }

const char* to_string(CoupledEventKind kind) {
    switch (kind) {
        case CoupledEventKind::start: return "start";
        case CoupledEventKind::flow_sample: return "flow-sample";
        case CoupledEventKind::single_jump: return "single-jump";
        case CoupledEventKind::double_jump: return "double-jump";
        case CoupledEventKind::merge: return "merge";
        case CoupledEventKind::split: return "split";
        case CoupledEventKind::end: return "end";
    }
    return "?";
}

double delta(const CoupledState& s) {
    return (s.x - s.x_tilde).norm() + (s.mode != s.mode_tilde ? 1.0 : 0.0);
}

const CoupledState& CoupledPath::state_at(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    const CoupledState* found = nullptr;
    for (const auto& e : events) {
        if (e.t > t + tol) break;
        const bool is_record = e.kind == CoupledEventKind::start || e.kind == CoupledEventKind::flow_sample ||
                               e.kind == CoupledEventKind::end;
        if (is_record && std::abs(e.t - t) <= tol) found = &e.state;
    }
    if (!found) throw RangeError("coupled path has no record at t = " + std::to_string(t));
    return *found;
}

namespace {

void check_pair(const SwitchedModel& model, const HybridState& z0, const HybridState& z1, double horizon) {
    if (!(horizon >= 0.0)) throw RangeError("negative horizon");
    for (const auto* z : {&z0, &z1}) {
        if (z->x.size() != model.dim || !z->x.allFinite())
            throw InvalidAssumption("initial point has the wrong dimension or is not finite");
        if (z->mode < 0 || z->mode >= model.modes()) throw InvalidAssumption("initial mode out of range");
    }
}

CoupledState initial_state(const HybridState& z0, const HybridState& z1) {
    CoupledState s;
    s.x = z0.x;
    s.x_tilde = z1.x;
    s.mode = z0.mode;
    s.mode_tilde = z1.mode;
    s.phase = z0.mode == z1.mode ? Phase::merged : Phase::independent;
    return s;
}

CoupledState flowed(const SwitchedModel& model, const CoupledState& s, double dt) {
    CoupledState out = s;
    out.x = flow_step(model.fields[s.mode], s.x, dt, model.integrator);
    out.x_tilde = flow_step(model.fields[s.mode_tilde], s.x_tilde, dt, model.integrator);
    return out;
}

// Samples in (t0, t1] flowed from the state at t0.
void record_samples(const SwitchedModel& model, const CoupledState& s, double t0, double t1,
                    std::span<const double> sample_times, std::size_t& next, CoupledPath& path) {
    while (next < sample_times.size() && sample_times[next] <= t1) {
        const double ts = sample_times[next++];
        if (ts <= t0) continue;
        path.events.push_back({ts, flowed(model, s, ts - t0), CoupledEventKind::flow_sample});
    }
}

}  // namespace

CoupledPath couple_constant(const SwitchedModel& model, const HybridState& z0, const HybridState& z0_tilde,
                            double horizon, std::span<const double> sample_times, Rng& rng, bool record_jumps) {
    if (!model.constant_rates()) throw InvalidAssumption("couple_constant needs constant rates");
    check_pair(model, z0, z0_tilde, horizon);
    const SwitchGenerator& gen = model.generator();
    const Vec lambda = gen.total_rates();

    CoupledPath path;
    path.seed = rng.seed();
    path.horizon = horizon;
    CoupledState s = initial_state(z0, z0_tilde);
    path.events.push_back({0.0, s, CoupledEventKind::start});

    double t = 0.0;
    std::size_t next = 0;
    // absolute clock times; the merged phase uses clock[0] only
    double clock[2] = {rng.exponential(lambda(s.mode)),
                       s.phase == Phase::merged ? kInf : rng.exponential(lambda(s.mode_tilde))};
    while (true) {
        const int who = clock[0] <= clock[1] ? 0 : 1;
        const double t_next = clock[who];
        const double t_end = t_next < horizon ? t_next : horizon;
        record_samples(model, s, t, t_end, sample_times, next, path);
        s = flowed(model, s, t_end - t);
        t = t_end;
        if (!(t_next < horizon)) {
            path.events.push_back({horizon, s, CoupledEventKind::end});
            return path;
        }
        CoupledEventKind kind;
        if (s.phase == Phase::merged) {
            s.mode = sample_jump_target(gen, s.mode, rng);
            s.mode_tilde = s.mode;
            clock[0] = t + rng.exponential(lambda(s.mode));
            kind = CoupledEventKind::double_jump;
        } else {
            ModeId& m = who == 0 ? s.mode : s.mode_tilde;
            m = sample_jump_target(gen, m, rng);
            if (s.mode == s.mode_tilde) {
                s.phase = Phase::merged;
                clock[0] = t + rng.exponential(lambda(s.mode));
                clock[1] = kInf;
                kind = CoupledEventKind::merge;
            } else {
                clock[who] = t + rng.exponential(lambda(m));
                kind = CoupledEventKind::single_jump;
            }
        }
        if (record_jumps || kind == CoupledEventKind::merge) path.events.push_back({t, s, kind});
    }
}

CoupledPath couple_state_dependent(const SwitchedModel& model, const HybridState& z0,
                                   const HybridState& z0_tilde, double horizon,
                                   std::span<const double> sample_times, Rng& rng, bool record_jumps) {
    if (model.constant_rates()) throw InvalidAssumption("couple_state_dependent needs state-dependent rates");
    check_pair(model, z0, z0_tilde, horizon);
    const StateDependentRates& rates = model.state_rates();
    const double upper = rates.upper_bound;
    const double clock_rate = 2.0 * upper;

    CoupledPath path;
    path.seed = rng.seed();
    path.horizon = horizon;
    CoupledState s = initial_state(z0, z0_tilde);
    path.events.push_back({0.0, s, CoupledEventKind::start});

    // stream k: (which copies jump, target)
    enum Stream { x_only, tilde_only, both };
    struct Entry {
        Stream stream;
        ModeId target;
    };
    std::vector<double> weights;
    std::vector<Entry> entries;

    auto check_total = [&](double total) {
        if (total > upper * (1.0 + 1e-12))
            throw BoundViolation("jump rate " + std::to_string(total) + " exceeds the declared bound " +
                                 std::to_string(upper));
    };

    double t = 0.0;
    std::size_t next = 0;
    while (true) {
        const double t_next = t + rng.exponential(clock_rate);
        const double t_end = t_next < horizon ? t_next : horizon;
        record_samples(model, s, t, t_end, sample_times, next, path);
        s = flowed(model, s, t_end - t);
        t = t_end;
        if (!(t_next < horizon)) {
            path.events.push_back({horizon, s, CoupledEventKind::end});
            return path;
        }

        weights.clear();
        entries.clear();
        double total_x = 0.0;
        double total_tilde = 0.0;
        if (s.phase == Phase::independent) {
            for (ModeId j : rates.targets[s.mode]) {
                const double a = rates.rate(s.x, s.mode, j);
                total_x += a;
                weights.push_back(a);
                entries.push_back({x_only, j});
            }
            for (ModeId j : rates.targets[s.mode_tilde]) {
                const double a = rates.rate(s.x_tilde, s.mode_tilde, j);
                total_tilde += a;
                weights.push_back(a);
                entries.push_back({tilde_only, j});
            }
        } else {
            for (ModeId j : rates.targets[s.mode]) {
                const double a = rates.rate(s.x, s.mode, j);
                const double a_tilde = rates.rate(s.x_tilde, s.mode, j);
                total_x += a;
                total_tilde += a_tilde;
                weights.push_back(std::min(a, a_tilde));
                entries.push_back({both, j});
                weights.push_back(std::max(a - a_tilde, 0.0));
                entries.push_back({x_only, j});
                weights.push_back(std::max(a_tilde - a, 0.0));
                entries.push_back({tilde_only, j});
            }
        }
        check_total(total_x);
        check_total(total_tilde);

        const std::size_t k = rng.categorical(weights, clock_rate);
        if (k == weights.size()) continue;  // rejected proposal
        const Entry e = entries[k];
        CoupledEventKind kind;
        if (s.phase == Phase::merged) {
            if (e.stream == both) {
                s.mode = s.mode_tilde = e.target;
                kind = CoupledEventKind::double_jump;
            } else {
                (e.stream == x_only ? s.mode : s.mode_tilde) = e.target;
                s.phase = Phase::independent;
                kind = CoupledEventKind::split;
            }
        } else {
            (e.stream == x_only ? s.mode : s.mode_tilde) = e.target;
            if (s.mode == s.mode_tilde) {
                s.phase = Phase::merged;
                kind = CoupledEventKind::merge;
            } else {
                kind = CoupledEventKind::single_jump;
            }
        }
        if (record_jumps || kind == CoupledEventKind::merge || kind == CoupledEventKind::split)
            path.events.push_back({t, s, kind});
    }
}

std::vector<std::pair<double, double>> delta_process(const CoupledPath& path) {
    std::vector<std::pair<double, double>> out;
    out.reserve(path.events.size());
    for (const auto& e : path.events) out.emplace_back(e.t, delta(e.state));
    return out;
}

}  // namespace pdmp
