#include "doctest.h"

#include "pdmp/models.hpp"
#include "pdmp/simulator.hpp"

#include <algorithm>
#include <cmath>

using namespace pdmp;

namespace {

VectorField decay1d(double rate = 1.0, double target = 0.0) {
    return VectorField::affine(Mat::Constant(1, 1, -rate), Vec::Constant(1, rate * target), rate);
}

// two 1-d modes, F = -x in both, rates given as functions of x
SwitchedModel rate_model(StateDependentRates::RateFunction a, double upper, int modes = 2) {
    SwitchedModel m;
    m.name = "test";
    m.dim = 1;
    for (int k = 0; k < modes; ++k) m.fields.push_back(decay1d());
    StateDependentRates r;
    r.rate = std::move(a);
    r.targets = StateDependentRates::complete_targets(modes);
    r.lower_bound = 0.0;
    r.upper_bound = upper;
    m.rates = r;
    m.alpha = 1.0;
    m.region = {Vec::Zero(1), 1.0};
    return m;
}

// sup |F_n(x) - (1 - e^{-c x})|
double ks_exponential(std::vector<double> xs, double c) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double f = 1.0 - std::exp(-c * xs[k]);
        d = std::max({d, std::abs(f - k / n), std::abs(f - (k + 1) / n)});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("constant-rate jump times") {
    Rng rng(1);
    CHECK(std::isinf(next_jump_time_constant(0.0, rng)));
    CHECK(jump_time_from_unit_exponential(1.0, 0.7) == 0.7);
    CHECK(std::isinf(jump_time_from_unit_exponential(0.0, 0.7)));
    CHECK_THROWS_AS(next_jump_time_constant(-1.0, rng), InvalidAssumption);
    double sum = 0.0;
    const int n = 1000000;
    for (int k = 0; k < n; ++k) sum += next_jump_time_constant(4.0, rng);
    CHECK(std::abs(sum / n - 0.25) < 0.001);
}

TEST_CASE("unit exponential never returns zero") {
    Rng rng(2);
    double smallest = kInf;
    for (int k = 0; k < 100000; ++k) smallest = std::min(smallest, rng.unit_exponential());
    CHECK(smallest > 0.0);
    CHECK(std::isfinite(smallest));
}

TEST_CASE("inversion with constant rate is exponential") {
    const auto m = rate_model([](const Vec&, ModeId, ModeId) { return 2.0; }, 2.0);
    Rng rng(3);
    std::vector<double> ts;
    for (int k = 0; k < 100000; ++k) ts.push_back(next_jump_time_inversion(m, Vec::Constant(1, 0.5), 0, 50.0, rng).time);
    CHECK(ks_exponential(ts, 2.0) < 0.01);
}

TEST_CASE("inversion with a decaying rate can escape") {
    // F = -x and lambda = x from x0 = 1: integrated hazard tends to 1
    const auto m = rate_model([](const Vec& x, ModeId, ModeId) { return std::max(0.0, x(0)); }, 1.0);
    Rng rng(4);
    const auto finite = next_jump_time_inversion(m, Vec::Constant(1, 1.0), 0, 20.0, 0.999, rng);
    CHECK(finite.time == doctest::Approx(-std::log(1.0 - 0.999)).epsilon(1e-6));
    CHECK(finite.target == 1);
    CHECK(finite.x(0) == doctest::Approx(std::exp(-finite.time)).epsilon(1e-8));
    const auto never = next_jump_time_inversion(m, Vec::Constant(1, 1.0), 0, 20.0, 1.001, rng);
    CHECK(std::isinf(never.time));
    CHECK(never.target == -1);

    const int n = 3000;
    int escaped = 0;
    for (int k = 0; k < n; ++k)
        escaped += std::isinf(next_jump_time_inversion(m, Vec::Constant(1, 1.0), 0, 20.0, rng).time);
    const double p = std::exp(-1.0);
    CHECK(std::abs(double(escaped) / n - p) < 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("thinning") {
    Rng rng(5);
    const auto full = rate_model([](const Vec&, ModeId, ModeId) { return 3.0; }, 3.0);
    const auto half = rate_model([](const Vec&, ModeId, ModeId) { return 1.5; }, 3.0);
    const int n = 100000;
    std::vector<double> ts;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        ts.push_back(next_jump_thinning(full, Vec::Constant(1, 0.2), 0, kInf, rng).time);
        sum += next_jump_thinning(half, Vec::Constant(1, 0.2), 0, kInf, rng).time;
    }
    CHECK(ks_exponential(ts, 3.0) < 0.01);
    // mean 1/1.5, standard deviation 1/1.5
    CHECK(std::abs(sum / n - 2.0 / 3.0) < 3.0 * (2.0 / 3.0) / std::sqrt(double(n)));

    const auto split = rate_model([](const Vec&, ModeId, ModeId j) { return j == 1 ? 2.0 : 1.0; }, 3.0, 3);
    int ones = 0;
    for (int k = 0; k < n; ++k) ones += next_jump_thinning(split, Vec::Constant(1, 0.2), 0, kInf, rng).target == 1;
    CHECK(std::abs(double(ones) / n - 2.0 / 3.0) < 3.0 * std::sqrt((2.0 / 9.0) / n));

    const auto over = rate_model([](const Vec&, ModeId, ModeId) { return 5.0; }, 3.0);
    CHECK_THROWS_AS(next_jump_thinning(over, Vec::Constant(1, 0.2), 0, kInf, rng), BoundViolation);

    const auto none = next_jump_thinning(full, Vec::Constant(1, 1.0), 0, 1e-12, rng);
    CHECK((std::isinf(none.time) || none.time < 1e-12));
}

TEST_CASE("thinning and inversion agree") {
    auto model = toy_state_dependent_model();
    Rng rng(6);
    std::vector<double> a, b;
    for (int k = 0; k < 100000; ++k) {
        a.push_back(next_jump_thinning(model, Vec::Constant(1, 0.3), 0, 100.0, rng).time);
        b.push_back(next_jump_time_inversion(model, Vec::Constant(1, 0.3), 0, 100.0, rng).time);
    }
    CHECK(ks_two_sample(a, b) < 0.01);
}

TEST_CASE("sample grid") {
    const auto g = sample_grid(1.0, 0.25);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == 0.25);
    CHECK(g[2] == 0.75);
    CHECK(sample_grid(1.0, 2.0).empty());
}

TEST_CASE("simulate pure flow") {
    SwitchedModel m;
    m.dim = 1;
    m.fields = {decay1d()};
    m.rates = SwitchGenerator::from_matrix(Mat::Zero(1, 1));
    m.alpha_modes = Vec::Ones(1);
    m.region = {Vec::Zero(1), 1.0};
    Rng rng(7);
    const auto traj = simulate(m, {Vec::Constant(1, 1.0), 0}, 1.0, 0.1, rng);
    CHECK(traj.jump_count() == 0);
    CHECK(traj.events.front().kind == EventKind::start);
    CHECK(traj.events.back().kind == EventKind::end);
    CHECK(std::abs(traj.events.back().x(0) - std::exp(-1.0)) < 1e-6);
    for (std::size_t k = 1; k < traj.events.size(); ++k) CHECK(traj.events[k].t > traj.events[k - 1].t);
    CHECK_THROWS_AS(traj.nearest_sample(1.5), RangeError);
    CHECK(traj.nearest_sample(0.5).x(0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("toy model stays on its segment") {
    const auto m = toy_model();
    Rng rng(8);
    const auto traj = simulate(m, {Vec::Zero(2), 0}, 50.0, 0.05, rng);
    for (const auto& e : traj.events) {
        CHECK(e.x(0) >= -1e-12);
        CHECK(e.x(0) <= 1.0 + 1e-12);
        CHECK(std::abs(e.x(1)) < 1e-12);
    }
    for (std::size_t k = 1; k < traj.events.size(); ++k) {
        if (traj.events[k].kind != EventKind::jump) CHECK(traj.events[k].mode == traj.events[k - 1].mode);
    }
}

TEST_CASE("jump counts are Poisson") {
    const auto m = toy_model();
    double sum = 0.0, sq = 0.0;
    const int n = 1000;
    for (int r = 0; r < n; ++r) {
        Rng rng(derive_seed(9, r));
        const std::vector<double> times;
        const double c = simulate(m, {Vec::Zero(2), 0}, 100.0, times, rng).jump_count();
        sum += c;
        sq += c * c;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean - 100.0) < 3.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("joint simulation equals reconstruction") {
    const auto m = toy_model(1.0, 2.0, 1.5, Vec{{1.0, 0.5}});
    const auto times = sample_grid(10.0, 0.1);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Rng r1(seed), r2(seed), r3(seed);
        const HybridState z0{Vec{{0.3, -0.2}}, 1};
        const auto a = simulate(m, z0, 10.0, times, r1);
        const auto b = simulate_joint(m, z0, 10.0, times, r2);
        const auto path = sample_ctmc_path(m.generator(), 1, 10.0, r3);
        const auto c = reconstruct(m, path, z0.x, times);
        REQUIRE(a.events.size() == b.events.size());
        REQUIRE(a.events.size() == c.events.size());
        for (std::size_t k = 0; k < a.events.size(); ++k) {
            CHECK(a.events[k].t == b.events[k].t);
            CHECK(a.events[k].mode == b.events[k].mode);
            CHECK(a.events[k].x == b.events[k].x);
            CHECK(a.events[k].x == c.events[k].x);
        }
    }
    Rng rng(1);
    CHECK_THROWS_AS(simulate_joint(toy_state_dependent_model(), {Vec::Zero(1), 0}, 1.0, times, rng),
                    InvalidAssumption);
}

TEST_CASE("moment estimates") {
    const auto m = toy_model();
    const std::vector<double> times{5.0, 20.0, 40.0};
    std::vector<Trajectory> trajs;
    for (int r = 0; r < 4000; ++r) {
        Rng rng(derive_seed(10, r));
        trajs.push_back(simulate(m, {Vec::Zero(2), r % 2}, 41.0, times, rng, false));
    }
    const auto m1 = moment_estimate(trajs, 1.0, 40.0);
    CHECK(m1.mean >= 0.0);
    CHECK(m1.mean <= 1.0);
    const auto a = moment_estimate(trajs, 2.0, 20.0);
    const auto b = moment_estimate(trajs, 2.0, 40.0);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.std_error, b.std_error));

    SwitchedModel decay;
    decay.dim = 1;
    decay.fields = {decay1d()};
    decay.rates = SwitchGenerator::from_matrix(Mat::Zero(1, 1));
    decay.alpha_modes = Vec::Ones(1);
    std::vector<Trajectory> d;
    Rng rng(11);
    d.push_back(simulate(decay, {Vec::Constant(1, 2.0), 0}, 30.0, times, rng));
    CHECK(moment_estimate(d, 2.0, 20.0).mean < 1e-15);

    const double vals[] = {1.0, 2.0, 3.0, 4.0};
    const auto j = jackknife_mean(vals);
    CHECK(j.mean == 2.5);
    // jackknife SE of the mean equals s / sqrt(n)
    CHECK(j.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("state-dependent confinement") {
    const auto m = toy_state_dependent_model();
    const double r = m.region.radius;
    for (int k = 0; k < 50; ++k) {
        Rng rng(derive_seed(12, k));
        const auto traj = simulate(m, {Vec::Constant(1, k % 2 ? 3.0 * r : -3.0 * r), k % 2}, 20.0, 0.05, rng);
        bool inside = false;
        for (const auto& e : traj.events) {
            if (inside) CHECK(std::abs(e.x(0)) <= r + 1e-8);
            inside = inside || std::abs(e.x(0)) <= r;
        }
        CHECK(inside);
    }
}
