#pragma once

#include "pdmp/core.hpp"
#include "pdmp/flows.hpp"
#include "pdmp/switching.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace pdmp {

/// Position-dependent jump rates a(x, i, j).
///
/// `targets[i]` lists the modes reachable from i; a(x, i, j) is only ever evaluated
/// for j in targets[i]. The declared constants are the contract the audit checks:
/// a(x,i,j) >= lower_bound on the support, sum_j |a(x,i,j) - a(y,i,j)| <= lipschitz |x - y|,
/// and sum_j a(x,i,j) <= upper_bound (the thinning bound) on the audit region.
struct StateDependentRates {
    using RateFunction = std::function<double(const Vec& x, ModeId from, ModeId to)>;

    RateFunction rate;
    std::vector<std::vector<ModeId>> targets;
    double lower_bound = 0.0;
    double lipschitz = 0.0;
    double upper_bound = 0.0;

    /// lambda(x, i) = sum_{j != i} a(x, i, j)
    double total(const Vec& x, ModeId i) const;
    /// Every j != i reachable from every i.
    static std::vector<std::vector<ModeId>> complete_targets(int n_modes);
};

enum class JumpSampler { thinning, inversion };

/// Ball used for rate audits and confinement checks.
struct Region {
    Vec center;
    double radius = 0.0;
};

/// Full problem definition: one vector field per mode plus the jump mechanism.
struct SwitchedModel {
    std::string name;
    int dim = 1;
    std::vector<VectorField> fields;
    std::variant<SwitchGenerator, StateDependentRates> rates;
    /// Per-mode dissipativity constants (constant-rate setting).
    Vec alpha_modes;
    /// Uniform dissipativity constant (state-dependent setting); 0 when not declared.
    double alpha = 0.0;
    Region region;
    FlowIntegrator integrator;
    JumpSampler sampler = JumpSampler::thinning;

    int modes() const noexcept { return static_cast<int>(fields.size()); }
    bool constant_rates() const noexcept { return std::holds_alternative<SwitchGenerator>(rates); }
    const SwitchGenerator& generator() const { return std::get<SwitchGenerator>(rates); }
    const StateDependentRates& state_rates() const { return std::get<StateDependentRates>(rates); }

    /// a(x, i, j) for either rate kind.
    double rate(const Vec& x, ModeId i, ModeId j) const;
    double total_rate(const Vec& x, ModeId i) const;
    /// Modes reachable from i.
    std::vector<ModeId> targets(ModeId i) const;
};

struct RateAudit {
    bool pass = false;
    double measured_lower = kInf;
    double measured_upper = 0.0;
    double measured_lipschitz = 0.0;
    int points = 0;
    std::string message;
};

/// Grid audit of the declared rate constants over region x E: roughly `grid_points`
/// points of the region's bounding box, filtered to the ball.
RateAudit audit_rates(const SwitchedModel& model, int grid_points = 10000);

struct ModelAudit {
    bool pass = true;
    std::vector<std::string> lines;
};

/// Dissipativity of every field (per-mode or uniform alpha), rate constants, and
/// irreducibility of constant generators.
ModelAudit audit_model(const SwitchedModel& model, Rng& rng, int samples = 2000);

}  // namespace pdmp
