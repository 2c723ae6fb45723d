#include "pdmp/models.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace pdmp {

namespace {

std::vector<VectorField> toy_fields(double alpha, const Vec& a) {
    const int d = static_cast<int>(a.size());
    const Mat m = -alpha * Mat::Identity(d, d);
    return {VectorField::affine(m, Vec::Zero(d), alpha), VectorField::affine(m, alpha * a, alpha)};
}

}  // namespace

SwitchedModel toy_model(double lambda0, double lambda1, double alpha, const Vec& a) {
    if (!(lambda0 > 0.0) || !(lambda1 > 0.0)) throw InvalidAssumption("toy rates must be positive");
    if (!(alpha > 0.0)) throw InvalidAssumption("toy alpha must be positive");
    if (a.size() < 1) throw InvalidAssumption("toy offset must have dimension >= 1");
    SwitchedModel model;
    model.name = "toy";
    model.dim = static_cast<int>(a.size());
    model.fields = toy_fields(alpha, a);
    Mat jump(2, 2);
    jump << 0.0, 1.0, 1.0, 0.0;
    model.rates = SwitchGenerator::from_rates(Vec{{lambda0, lambda1}}, jump);
    model.alpha_modes = Vec::Constant(2, alpha);
    model.alpha = alpha;
    model.region = {Vec::Zero(model.dim), invariant_radius(model.fields, alpha)};
    return model;
}

SwitchedModel toy_state_dependent_model(double alpha, const Vec& a, double base, double amplitude) {
    if (!(alpha > 0.0)) throw InvalidAssumption("toy alpha must be positive");
    if (amplitude < 0.0 || !(base > amplitude)) throw InvalidAssumption("toy rates need base > amplitude >= 0");
    SwitchedModel model;
    model.name = "toy-state-dependent";
    model.dim = static_cast<int>(a.size());
    model.fields = toy_fields(alpha, a);
    StateDependentRates rates;
    rates.rate = [base, amplitude](const Vec& x, ModeId i, ModeId) {
        return base + amplitude * (i == 0 ? std::sin(x(0)) : std::cos(x(0)));
    };
    rates.targets = StateDependentRates::complete_targets(2);
    rates.lower_bound = base - amplitude;
    rates.upper_bound = base + amplitude;
    rates.lipschitz = amplitude;
    model.rates = std::move(rates);
    model.alpha_modes = Vec::Constant(2, alpha);
    model.alpha = alpha;
    model.region = {Vec::Zero(model.dim), invariant_radius(model.fields, alpha)};
    return model;
}

void MorrisLecarParams::validate(int k_cap) const {
    if (!(C > 0.0)) throw InvalidAssumption("Morris-Lecar: C must be positive");
    if (!(g[2] > 0.0)) throw InvalidAssumption("Morris-Lecar: g3 must be positive");
    if (g[0] < 0.0 || g[1] < 0.0) throw InvalidAssumption("Morris-Lecar: conductances must be non-negative");
    if (K < 1) throw InvalidAssumption("Morris-Lecar: K must be at least 1");
    if (K > k_cap) throw InvalidAssumption("Morris-Lecar: K exceeds the cap " + std::to_string(k_cap));
    if (V_slope[0] == 0.0 || V_slope[1] == 0.0) throw InvalidAssumption("Morris-Lecar: slope potentials must be non-zero");
    if (!(c[0] > 0.0) || !(c[1] > 0.0)) throw InvalidAssumption("Morris-Lecar: rate scales must be positive");
}

double MorrisLecarParams::v_max() const {
    return std::max({V_eq[0], V_eq[1], V_eq[2] + (I_in + 1.0) / g[2]});
}

MorrisLecarRates ml_rates(double V, const MorrisLecarParams& params) {
    MorrisLecarRates r;
    double out[4];
    for (int k = 0; k < 2; ++k) {
        const double z = (V - params.V_half[k]) / params.V_slope[k];
        const double ch = params.c[k] * std::cosh(0.5 * z);
        const double th = std::tanh(z);
        out[2 * k] = ch * (1.0 + th);
        out[2 * k + 1] = ch * (1.0 - th);
    }
    r.alpha1 = out[0];
    r.beta1 = out[1];
    r.alpha2 = out[2];
    r.beta2 = out[3];
    return r;
}

namespace {

double ml_rate(const MorrisLecarParams& p, double V, ModeId from, ModeId to) {
    const int K = p.K;
    const int k1 = from / (K + 1);
    const int k2 = from % (K + 1);
    const int j1 = to / (K + 1);
    const int j2 = to % (K + 1);
    const auto r = ml_rates(V, p);
    if (j2 == k2) {
        if (j1 == k1 + 1) return (K - k1) * r.alpha1;
        if (j1 == k1 - 1) return k1 * r.beta1;
    } else if (j1 == k1) {
        if (j2 == k2 + 1) return (K - k2) * r.alpha2;
        if (j2 == k2 - 1) return k2 * r.beta2;
    }
    return 0.0;
}

}  // namespace

SwitchedModel morris_lecar_model(const MorrisLecarParams& params, int k_cap) {
    params.validate(k_cap);
    const int K = params.K;
    const int n = (K + 1) * (K + 1);
    SwitchedModel model;
    model.name = "morris-lecar";
    model.dim = 1;
    StateDependentRates rates;
    rates.targets.resize(n);
    for (int k1 = 0; k1 <= K; ++k1) {
        for (int k2 = 0; k2 <= K; ++k2) {
            const double u1 = static_cast<double>(k1) / K;
            const double u2 = static_cast<double>(k2) / K;
            const double leak = params.g[0] * u1 + params.g[1] * u2 + params.g[2];
            Mat m(1, 1);
            m(0, 0) = -leak / params.C;
            Vec v(1);
            v(0) = (params.I_in + params.g[0] * u1 * params.V_eq[0] + params.g[1] * u2 * params.V_eq[1] +
                    params.g[2] * params.V_eq[2]) /
                   params.C;
            model.fields.push_back(VectorField::affine(m, v, leak / params.C));
            auto& t = rates.targets[ml_mode(k1, k2, K)];
            if (k1 < K) t.push_back(ml_mode(k1 + 1, k2, K));
            if (k1 > 0) t.push_back(ml_mode(k1 - 1, k2, K));
            if (k2 < K) t.push_back(ml_mode(k1, k2 + 1, K));
            if (k2 > 0) t.push_back(ml_mode(k1, k2 - 1, K));
        }
    }
    rates.rate = [params](const Vec& x, ModeId from, ModeId to) { return ml_rate(params, x(0), from, to); };

    // constants from a grid over the invariant segment, widened by safety factors
    const double vmax = params.v_max();
    constexpr int kGrid = 4000;
    const double h = vmax / kGrid;
    double lower = kInf;
    double upper = 0.0;
    double lip = 0.0;
    std::vector<double> prev(n * 4, 0.0);
    for (int g = 0; g <= kGrid; ++g) {
        const Vec x = Vec::Constant(1, g * h);
        for (int i = 0; i < n; ++i) {
            double total = 0.0;
            double diff = 0.0;
            const auto& t = rates.targets[i];
            for (std::size_t k = 0; k < t.size(); ++k) {
                const double a = rates.rate(x, i, t[k]);
                total += a;
                lower = std::min(lower, a);
                if (g > 0) diff += std::abs(a - prev[i * 4 + k]);
                prev[i * 4 + k] = a;
            }
            upper = std::max(upper, total);
            if (g > 0) lip = std::max(lip, diff / h);
        }
    }
    rates.lower_bound = 0.9 * lower;
    rates.upper_bound = 1.05 * upper;
    rates.lipschitz = 1.1 * lip;
    model.rates = std::move(rates);
    model.alpha = params.g[2] / params.C;
    model.alpha_modes = Vec::Constant(n, model.alpha);
    model.region = {Vec::Constant(1, 0.5 * vmax), 0.5 * vmax};
    return model;
}

double StationaryDensity::partial(int i, double x) const {
    if (!(x > lo && x < hi)) return 0.0;
    // log q(x) - log q(mid) = -int_mid^x (lambda0 / F0 + lambda1 / F1), closed form for affine F
    auto antiderivative = [this](double s) {
        return lambda0 / m0 * std::log(std::abs(m0 * s + v0)) + lambda1 / m1 * std::log(std::abs(m1 * s + v1));
    };
    const double q = std::exp(antiderivative(mid) - antiderivative(x));
    const double f = i == 0 ? m0 * x + v0 : m1 * x + v1;
    return q / std::abs(f) / norm;
}

double StationaryDensity::density(double x) const { return partial(0, x) + partial(1, x); }

double StationaryDensity::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw RangeError("quantile level outside [0, 1]");
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.begin()) return grid.front();
    if (it == cdf.end()) return grid.back();
    const std::size_t k = it - cdf.begin();
    const double span = cdf[k] - cdf[k - 1];
    const double w = span > 0.0 ? (u - cdf[k - 1]) / span : 0.0;
    return grid[k - 1] + w * (grid[k] - grid[k - 1]);
}

std::vector<double> StationaryDensity::quantile_samples(int n) const {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = quantile((k + 0.5) / n);
    return out;
}

StationaryDensity stationary_density_1d(const SwitchedModel& model, int cdf_points) {
    if (model.dim != 1 || model.modes() != 2 || !model.constant_rates())
        throw InvalidAssumption("stationary density needs d = 1, two modes and constant rates");
    for (const auto& f : model.fields) {
        if (!f.is_affine() || !(f.affine_data().matrix(0, 0) < 0.0))
            throw InvalidAssumption("stationary density supports contracting affine fields only");
    }
    StationaryDensity sd;
    sd.m0 = model.fields[0].affine_data().matrix(0, 0);
    sd.v0 = model.fields[0].affine_data().offset(0);
    sd.m1 = model.fields[1].affine_data().matrix(0, 0);
    sd.v1 = model.fields[1].affine_data().offset(0);
    sd.lambda0 = model.generator().matrix()(0, 1);
    sd.lambda1 = model.generator().matrix()(1, 0);
    const double x0 = -sd.v0 / sd.m0;
    const double x1 = -sd.v1 / sd.m1;
    if (x0 == x1) throw InvalidAssumption("stationary density needs distinct fixed points");
    sd.lo = std::min(x0, x1);
    sd.hi = std::max(x0, x1);
    sd.mid = 0.5 * (sd.lo + sd.hi);
    sd.norm = 1.0;

    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&sd](double x) { return sd.density(x); };
    sd.grid.resize(cdf_points + 1);
    sd.cdf.resize(cdf_points + 1);
    sd.grid[0] = sd.lo;
    sd.cdf[0] = 0.0;
    for (int k = 1; k <= cdf_points; ++k) {
        sd.grid[k] = k == cdf_points ? sd.hi : sd.lo + (sd.hi - sd.lo) * k / cdf_points;
        sd.cdf[k] = sd.cdf[k - 1] + integrator.integrate(f, sd.grid[k - 1], sd.grid[k]);
    }
    const double total = sd.cdf.back();
    if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("stationary density did not normalize");
    sd.norm = total;
    for (double& c : sd.cdf) c /= total;
    return sd;
}

}  // namespace pdmp
