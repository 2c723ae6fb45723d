#include "pdmp/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pdmp {

double companion_escape_probability(double u, double kappa, double alpha) {
    return std::exp(-kappa * u / alpha);
}

double companion_jump_time_from(double u, double kappa, double alpha, double e1) {
    const double hazard_scale = kappa * u;
    if (!(hazard_scale > 0.0)) return kInf;
    if (!(e1 < hazard_scale / alpha)) return kInf;
    return -std::log1p(-alpha * e1 / hazard_scale) / alpha;
}

double companion_jump_time(double D, double kappa, double alpha, Rng& rng) {
    if (!(D > 0.0) || !(alpha > 0.0) || kappa < 0.0)
        throw InvalidAssumption("companion jump time needs D, alpha > 0 and kappa >= 0");
    return companion_jump_time_from(D, kappa, alpha, rng.unit_exponential());
}

double companion_finite_cdf(double D, double kappa, double alpha, double t) {
    if (!(t > 0.0)) return 0.0;
    const double scale = D * kappa / alpha;
    return std::expm1(-scale * -std::expm1(-alpha * t)) / std::expm1(-scale);
}

double CompanionPath::value_at(double t) const {
    if (t < 0.0 || t > horizon * (1.0 + 1e-12)) throw RangeError("time outside the companion horizon");
    auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                               [](double v, const std::pair<double, double>& j) { return v < j.first; });
    const auto& [tj, uj] = *std::prev(it);
    if (uj == top) return top;
    return uj * std::exp(-alpha * (t - tj));
}

CompanionPath sample_companion(const CompanionParams& params, double u0, double horizon, Rng& rng) {
    const double top = params.D + 1.0;
    if (!(params.b > 0.0) || !(params.alpha > 0.0) || !(params.D > 0.0) || params.kappa < 0.0)
        throw InvalidAssumption("companion process needs D, alpha, b > 0 and kappa >= 0");
    if (!((u0 >= 0.0 && u0 <= params.D) || u0 == top))
        throw InvalidAssumption("companion start must lie in [0, D] or equal D + 1");
    CompanionPath path;
    path.horizon = horizon;
    path.alpha = params.alpha;
    path.top = top;
    path.jumps.emplace_back(0.0, u0);
    double t = 0.0;
    double u = u0;
    while (true) {
        if (u == top) {
            const double hold = rng.exponential(params.b);
            if (!(t + hold < horizon)) break;
            t += hold;
            u = params.D;
        } else {
            const double wait = companion_jump_time_from(u, params.kappa, params.alpha, rng.unit_exponential());
            if (!(t + wait < horizon)) break;
            t += wait;
            u = top;
        }
        path.jumps.emplace_back(t, u);
    }
    return path;
}

GammaC gamma_c_constants(double alpha, double b, double p) {
    if (!(alpha > 0.0) || !(b > 0.0)) throw InvalidAssumption("alpha and b must be positive");
    if (!(p > 0.0) || p > 1.0) throw InvalidAssumption("p must lie in (0, 1]");
    const double sum = alpha + b;
    const double disc = sum * sum - 4.0 * b * p * alpha;
    if (!(disc > 0.0)) throw BoundaryError("double root: (alpha + b)^2 = 4 b p alpha");
    const double root = std::sqrt(disc);
    GammaC out;
    // smaller root of xi^2 - (alpha+b) xi + p alpha b, written without cancellation
    out.gamma = 2.0 * p * alpha * b / (sum + root);
    out.c = alpha / (alpha + out.gamma) * std::numbers::e * p * alpha * b / root;
    return out;
}

double companion_mean_bound(double D, double alpha, double b, double kappa, double t) {
    const double p = std::exp(-D * kappa / alpha);
    const double sum = alpha + b;
    const double disc = sum * sum - 4.0 * p * alpha * b;
    if (!(disc > 0.0)) return kInf;
    const double root = std::sqrt(disc);
    const double gamma = 2.0 * p * alpha * b / (sum + root);
    const double growth = (D + 1.0) * (p * alpha * b * std::numbers::e / root) * alpha * t / (alpha + gamma);
    return (D + growth) * std::exp(-alpha * gamma * t / (alpha + gamma));
}

}  // namespace pdmp
