#include "pdmp/bounds.hpp"

#include "pdmp/coupling.hpp"

#include <cmath>

namespace pdmp {

const char* to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::constant_rate: return "constant-rate";
        case BoundKind::state_dependent: return "state-dependent";
        case BoundKind::companion_mean: return "companion-mean";
    }
    return "?";
}

double BoundCurve::constant(const std::string& name) const {
    for (const auto& [key, value] : constants)
        if (key == name) return value;
    throw RangeError("bound curve has no constant '" + name + "'");
}

BoundCurve constant_rate_envelope(const SpectralReport& spectral, double p, double q, double moment_bound,
                                  std::span<const double> times) {
    if (!(p < q)) throw InvalidAssumption("constant-rate envelope needs p < q");
    if (!(q < spectral.kappa_moment))
        throw InvalidAssumption("constant-rate envelope needs q < kappa (q = " + std::to_string(q) +
                                ", kappa = " + std::to_string(spectral.kappa_moment) + ")");
    if (!(moment_bound >= 0.0)) throw InvalidAssumption("moment bound must be non-negative");
    const SpectralEntry& entry = spectral.at(p);
    const double theta = entry.theta;
    const double rho = spectral.rho;
    if (!(theta > 0.0) || !(rho > 0.0)) throw InvalidAssumption("theta_p and rho must be positive");
    const double s = q / (q - 1.0);
    const double rate = theta / (1.0 + s * theta / rho);
    const double prefactor = std::pow(2.0, p + 1.0) * std::pow(moment_bound, p / q) * entry.c2;

    BoundCurve curve;
    curve.kind = BoundKind::constant_rate;
    curve.constants = {{"p", p},
                       {"q", q},
                       {"s", s},
                       {"kappa", spectral.kappa_moment},
                       {"theta_p", theta},
                       {"rho", rho},
                       {"C2", entry.c2},
                       {"M_qm", moment_bound},
                       {"beta", theta / (theta + rho / s)},
                       {"prefactor", prefactor},
                       {"rate", rate}};
    for (double t : times) {
        curve.times.push_back(t);
        curve.values.push_back(prefactor * std::exp(-rate * t));
    }
    return curve;
}

BoundCurve nonconstant_envelope(double alpha, double b, double kappa_lip, double r, std::span<const double> times) {
    if (!(alpha > 0.0) || !(b > 0.0) || kappa_lip < 0.0 || r < 0.0)
        throw InvalidAssumption("envelope needs alpha, b > 0 and kappa_lip, r >= 0");
    const double p = std::exp(-2.0 * r * kappa_lip / alpha);
    const GammaC gc = gamma_c_constants(alpha, b, p);
    const double rate = alpha * gc.gamma / (alpha + gc.gamma);

    BoundCurve curve;
    curve.kind = BoundKind::state_dependent;
    curve.constants = {{"alpha", alpha},       {"b", b},   {"kappa_lip", kappa_lip}, {"r", r},
                       {"p", p},               {"gamma", gc.gamma}, {"c", gc.c},
                       {"beta", alpha / (alpha + gc.gamma)}, {"rate", rate}};
    for (double t : times) {
        curve.times.push_back(t);
        curve.values.push_back((1.0 + 2.0 * r) * (1.0 + gc.c * t) * std::exp(-rate * t));
    }
    return curve;
}

double default_companion_rate(const SwitchedModel& model, int max_modes) {
    if (model.constant_rates()) throw InvalidAssumption("companion rate needs state-dependent rates");
    const auto& rates = model.state_rates();
    const int n = model.modes();
    if (n == 2) return 2.0 * rates.lower_bound;
    if (n > max_modes)
        throw InvalidAssumption("companion rate b: " + std::to_string(n) + " modes exceed the exact limit " +
                                std::to_string(max_modes));
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (ModeId j : rates.targets[i]) a(i, j) = rates.lower_bound;
        a(i, i) = -a.row(i).sum();
    }
    return coalescence_rate_exact(SwitchGenerator::from_matrix(a)).rate;
}

BoundCurve companion_envelope(double D, double alpha, double b, double kappa, std::span<const double> times) {
    BoundCurve curve;
    curve.kind = BoundKind::companion_mean;
    curve.constants = {{"D", D}, {"alpha", alpha}, {"b", b}, {"kappa", kappa}, {"p", std::exp(-D * kappa / alpha)}};
    for (double t : times) {
        curve.times.push_back(t);
        curve.values.push_back(companion_mean_bound(D, alpha, b, kappa, t));
    }
    return curve;
}

EnvelopeCheck envelope_check(const DistanceCurve& empirical, const BoundCurve& envelope, double slack) {
    const std::size_t n = empirical.times.size();
    if (n != envelope.times.size() || empirical.estimates.size() != n)
        throw RangeError("empirical curve and envelope are on different grids");
    EnvelopeCheck check;
    check.point_pass.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(empirical.times[k] - envelope.times[k]) > 1e-9 * std::max(1.0, std::abs(envelope.times[k])))
            throw RangeError("empirical curve and envelope are on different grids");
        const double half = k < empirical.half_widths.size() ? empirical.half_widths[k] : 0.0;
        const double env = envelope.values[k];
        const double est = empirical.estimates[k];
        check.point_pass[k] = est <= env * (1.0 + slack) + half;
        check.pass = check.pass && check.point_pass[k];
        const double ratio = env > 0.0 ? est / env : (est > 0.0 ? kInf : 0.0);
        if (check.worst_index < 0 || ratio > check.worst_ratio) {
            check.worst_ratio = ratio;
            check.worst_index = static_cast<int>(k);
        }
    }
    return check;
}

std::vector<double> linear_grid(double t_max, int points) {
    if (points < 2 || !(t_max > 0.0)) throw RangeError("grid needs at least two points and t_max > 0");
    std::vector<double> grid(points);
    for (int k = 0; k < points; ++k) grid[k] = t_max * k / (points - 1);
    grid.back() = t_max;
    return grid;
}

}  // namespace pdmp
