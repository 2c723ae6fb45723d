#include "doctest.h"

#include "pdmp/bounds.hpp"
#include "pdmp/coupling.hpp"
#include "pdmp/models.hpp"

#include <cmath>

using namespace pdmp;

namespace {

SwitchGenerator two_state(double l1, double l2) {
    Mat a(2, 2);
    a << -l1, l1, l2, -l2;
    return SwitchGenerator::from_matrix(a);
}

SpectralReport fake_report(double p, double theta, double rho, double c2 = 1.0, double kappa = kInf) {
    SpectralReport r;
    r.entries.push_back({p, theta, c2});
    r.rho = rho;
    r.kappa_moment = kappa;
    return r;
}

}  // namespace

TEST_CASE("constant-rate envelope") {
    const auto g = two_state(1, 1);
    const Vec alpha{{1.0, -0.5}};
    const double ps[] = {0.5, 1.0};
    const auto grid = linear_grid(10.0, 20);
    const std::vector<double> c2_grid(grid.begin() + 1, grid.end());
    const auto report = spectral_report(g, alpha, ps, c2_grid);
    // det(A_p) = p/2 - p^2/2 vanishes at p = 1
    CHECK(report.kappa_moment == doctest::Approx(1.0).epsilon(1e-7));
    CHECK_THROWS_AS(constant_rate_envelope(report, 1.0, 1.5, 1.0, grid), InvalidAssumption);
    CHECK_THROWS_AS(constant_rate_envelope(report, 0.5, 0.5, 1.0, grid), InvalidAssumption);

    // 2x2 closed form for theta at p = 1/2
    const double tr = -2.0 - 0.5 + 0.25, det = (-1.5) * (-0.75) - 1.0;
    const double theta = -(tr / 2.0 + std::sqrt(tr * tr / 4.0 - det));
    const double q = 0.8, s = q / (q - 1.0), M = 1.3;
    const auto curve = constant_rate_envelope(report, 0.5, q, M, grid);
    CHECK(curve.constant("theta_p") == doctest::Approx(theta).epsilon(1e-12));
    CHECK(curve.constant("rho") == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(curve.constant("s") == doctest::Approx(s));
    const double c2 = report.at(0.5).c2;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double expected = std::pow(2.0, 1.5) * std::pow(M, 0.5 / q) * c2 * std::exp(-theta / (1.0 + s * theta / 2.0) * grid[k]);
        CHECK(curve.values[k] == doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK(curve.values[0] == curve.constant("prefactor"));
    CHECK(curve.kind == BoundKind::constant_rate);
    CHECK_THROWS_AS(curve.constant("nope"), RangeError);
}

TEST_CASE("constant-rate envelope limits") {
    const double t[] = {0.0, 1.0};
    const auto far = constant_rate_envelope(fake_report(1.0, 0.7, 1e12), 1.0, 2.0, 1.0, t);
    CHECK(far.constant("rate") == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(far.values[0] == doctest::Approx(4.0));
    for (double theta : {0.1, 0.5, 2.0, 7.0}) {
        for (double rho : {0.2, 1.0, 3.0}) {
            for (double q : {1.2, 2.0, 5.0}) {
                const auto c = constant_rate_envelope(fake_report(1.0, theta, rho), 1.0, q, 2.0, t);
                const double s = q / (q - 1.0);
                CHECK(c.constant("rate") < theta);
                CHECK(c.constant("rate") < rho / s);
            }
        }
    }
}

TEST_CASE("nonconstant envelope") {
    const double t0[] = {0.0};
    CHECK(nonconstant_envelope(1.0, 2.0, 1.0, 1.5, t0).values[0] == doctest::Approx(4.0));

    const auto grid = linear_grid(20.0, 20);
    const auto flat = nonconstant_envelope(1.0, 2.0, 0.0, 1.0, grid);
    CHECK(flat.constant("p") == 1.0);
    CHECK(flat.constant("gamma") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flat.constant("rate") == doctest::Approx(1.0 / (1.0 + 1.0 / 1.0)));

    const auto curve = nonconstant_envelope(1.0, 2.0, 1.0, 1.0, grid);
    const double p = std::exp(-2.0);
    const double disc = 9.0 - 8.0 * p;
    const double gamma = (3.0 - std::sqrt(disc)) / 2.0;
    const double c = 1.0 / (1.0 + gamma) * std::exp(1.0) * p * 2.0 / std::sqrt(disc);
    CHECK(curve.constant("p") == doctest::Approx(0.1353352832366127).epsilon(1e-14));
    CHECK(curve.constant("gamma") == doctest::Approx(gamma).epsilon(1e-12));
    CHECK(curve.constant("c") == doctest::Approx(c).epsilon(1e-12));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = 3.0 * (1.0 + c * grid[k]) * std::exp(-grid[k] / (1.0 + 1.0 / gamma));
        CHECK(curve.values[k] == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("nonconstant envelope monotonicity") {
    const double late[] = {40.0};
    double previous = kInf;
    for (double alpha = 0.5; alpha <= 4.0; alpha += 0.25) {
        const double v = nonconstant_envelope(alpha, 2.0, 0.3, 1.0, late).values[0];
        CHECK(v <= previous * (1.0 + 1e-12));
        previous = v;
    }
    auto exponent = [](double a, double g) { return a * g / (a + g); };
    for (double a : {0.5, 1.0, 2.0})
        for (double g : {0.1, 0.5, 1.5}) {
            CHECK(exponent(a * 1.01, g) > exponent(a, g));
            CHECK(exponent(a, g * 1.01) > exponent(a, g));
        }
}

TEST_CASE("companion rate and envelope") {
    const auto toy = toy_state_dependent_model();
    CHECK(default_companion_rate(toy) == doctest::Approx(2.0 * 0.6));
    CHECK_THROWS_AS(default_companion_rate(toy_model()), InvalidAssumption);

    MorrisLecarParams ml;
    ml.K = 4;
    CHECK_THROWS_AS(default_companion_rate(morris_lecar_model(ml)), InvalidAssumption);
    ml.K = 2;
    const auto small = morris_lecar_model(ml);
    const double b = default_companion_rate(small);
    Mat a = Mat::Zero(9, 9);
    for (int i = 0; i < 9; ++i) {
        for (ModeId j : small.targets(i)) a(i, j) = small.state_rates().lower_bound;
        a(i, i) = -a.row(i).sum();
    }
    CHECK(b == doctest::Approx(coalescence_rate_exact(SwitchGenerator::from_matrix(a)).rate));
    CHECK(b > 0.0);

    const auto grid = linear_grid(15.0, 20);
    const auto env = companion_envelope(2.0, 1.0, 2.0, 1.0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(env.values[k] == companion_mean_bound(2.0, 1.0, 2.0, 1.0, grid[k]));
    CHECK(env.values[0] >= 2.0);
}

TEST_CASE("envelope check") {
    const auto grid = linear_grid(5.0, 6);
    const auto env = nonconstant_envelope(1.0, 2.0, 0.5, 1.0, grid);
    DistanceCurve zero;
    zero.times = grid;
    zero.estimates.assign(grid.size(), 0.0);
    zero.half_widths.assign(grid.size(), 0.0);
    CHECK(envelope_check(zero, env).pass);

    DistanceCurve close = zero;
    for (std::size_t k = 0; k < grid.size(); ++k) close.estimates[k] = env.values[k] * 1.001;
    CHECK(envelope_check(close, env, 0.02).pass);

    DistanceCurve spike = zero;
    spike.estimates[3] = 2.0 * env.values[3];
    const auto check = envelope_check(spike, env, 0.02);
    CHECK_FALSE(check.pass);
    CHECK_FALSE(check.point_pass[3]);
    CHECK(check.point_pass[2]);
    CHECK(check.worst_index == 3);
    CHECK(check.worst_ratio == doctest::Approx(2.0));

    DistanceCurve shifted = zero;
    shifted.times[2] += 0.1;
    CHECK_THROWS_AS(envelope_check(shifted, env), RangeError);
    DistanceCurve shorter = zero;
    shorter.times.pop_back();
    shorter.estimates.pop_back();
    CHECK_THROWS_AS(envelope_check(shorter, env), RangeError);
}

TEST_CASE("linear grid") {
    const auto g = linear_grid(10.0, 20);
    CHECK(g.size() == 20);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 10.0);
    CHECK_THROWS_AS(linear_grid(1.0, 1), RangeError);
}
