#include "doctest.h"

#include "pdmp/metrics.hpp"
#include "pdmp/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace pdmp;

namespace {

double brute_force_wp(const std::vector<Vec>& a, const std::vector<Vec>& b, double p) {
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = kInf;
    do {
        double cost = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) cost += std::pow((a[k] - b[perm[k]]).norm(), p);
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / a.size(), 1.0 / p);
}

std::vector<Vec> cloud(int n, int dim, Rng& rng) {
    std::vector<Vec> out;
    for (int k = 0; k < n; ++k) {
        Vec v(dim);
        for (int d = 0; d < dim; ++d) v(d) = 2.0 * rng.uniform() - 1.0;
        out.push_back(v);
    }
    return out;
}

std::vector<Vec> as_points(const std::vector<double>& xs) {
    std::vector<Vec> out;
    for (double x : xs) out.push_back(Vec::Constant(1, x));
    return out;
}

}  // namespace

TEST_CASE("1-d Wasserstein") {
    const std::vector<double> a{0.0, 1.0}, b{0.0, 2.0}, c{2.0, 0.0};
    CHECK(wasserstein_1d(a, a, 1.0) == 0.0);
    CHECK(wasserstein_1d(a, b, 1.0) == doctest::Approx(0.5));
    CHECK(wasserstein_1d(a, c, 1.0) == doctest::Approx(0.5));
    const std::vector<double> zeros(5, 0.0), eps(5, 0.125);
    CHECK(wasserstein_1d(zeros, eps, 1.0) == doctest::Approx(0.125));
    CHECK(wasserstein_1d(zeros, eps, 3.0) == doctest::Approx(0.125));
    // {0} vs {0, 1}: half the mass moves a distance 1
    const std::vector<double> one{0.0}, two{0.0, 1.0};
    CHECK(wasserstein_1d(one, two, 1.0) == doctest::Approx(0.5));
    CHECK(wasserstein_1d(one, two, 2.0) == doctest::Approx(std::sqrt(0.5)));
    const std::vector<double> empty;
    CHECK_THROWS_AS(wasserstein_1d(empty, a, 1.0), RangeError);
    CHECK_THROWS_AS(wasserstein_1d(a, b, 0.5), RangeError);
}

TEST_CASE("assignment solver") {
    Rng rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = cloud(8, 2, rng), b = cloud(8, 2, rng);
        for (double p : {1.0, 2.0}) CHECK(wasserstein_assignment(a, b, p) == doctest::Approx(brute_force_wp(a, b, p)).epsilon(1e-12));
    }
    auto a = cloud(6, 3, rng);
    auto shuffled = a;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(wasserstein_assignment(a, shuffled, 1.0) == doctest::Approx(0.0));
    const Vec v{{0.3, -0.4, 1.2}};
    auto moved = a;
    for (auto& x : moved) x += v;
    // two points and their translate
    const std::vector<Vec> pair{a[0], a[1]}, pair_moved{moved[0], moved[1]};
    CHECK(wasserstein_assignment(pair, pair_moved, 1.0) == doctest::Approx(v.norm()));

    Mat cost(3, 3);
    cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const auto match = solve_assignment(cost);
    double total = 0.0;
    for (int k = 0; k < 3; ++k) total += cost(k, match[k]);
    CHECK(total == 5.0);

    const std::vector<Vec> big(kAssignmentCap + 1, Vec::Zero(1));
    CHECK_THROWS_AS(wasserstein_assignment(big, big, 1.0), RangeError);
    const std::vector<Vec> three(3, Vec::Zero(1));
    CHECK_THROWS_AS(wasserstein_assignment(three, pair, 1.0), RangeError);
}

TEST_CASE("1-d and assignment agree") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a, b;
        for (int k = 0; k < 50; ++k) a.push_back(rng.uniform() * 4.0), b.push_back(rng.uniform() * 3.0 - 1.0);
        for (double p : {1.0, 1.5, 2.0})
            CHECK(std::abs(wasserstein_1d(a, b, p) - wasserstein_assignment(as_points(a), as_points(b), p)) < 1e-12);
    }
}

TEST_CASE("triangle inequality and scaling") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = cloud(30, 2, rng), b = cloud(30, 2, rng), c = cloud(30, 2, rng);
        for (double p : {1.0, 2.0}) {
            CHECK(wasserstein_assignment(a, c, p) <=
                  wasserstein_assignment(a, b, p) + wasserstein_assignment(b, c, p) + 1e-9);
        }
        auto sa = a, sb = b;
        for (auto& x : sa) x *= 2.5;
        for (auto& x : sb) x *= 2.5;
        CHECK(wasserstein_assignment(sa, sb, 2.0) == doctest::Approx(2.5 * wasserstein_assignment(a, b, 2.0)).epsilon(1e-10));
    }
    std::vector<double> a{0.1, 0.7, 3.0}, b{1.0, -2.0, 0.5};
    const double w = wasserstein_1d(a, b, 1.0);
    for (auto& x : a) x *= 3.0;
    for (auto& x : b) x *= 3.0;
    CHECK(wasserstein_1d(a, b, 1.0) == doctest::Approx(3.0 * w));
}

TEST_CASE("total variation") {
    const std::vector<double> mu{0.75, 0.25}, nu{0.25, 0.75}, d0{1.0, 0.0}, d1{0.0, 1.0};
    CHECK(tv_discrete(mu, mu) == 0.0);
    CHECK(tv_discrete(d0, d1) == 1.0);
    CHECK(tv_discrete(mu, nu) == doctest::Approx(0.5));
}

TEST_CASE("empirical measures") {
    EmpiricalMeasure m;
    m.add(Vec::Zero(1), 0, 1.0);
    m.add(Vec::Zero(1), 1, 3.0);
    const auto h = m.mode_histogram(3);
    CHECK(h[0] == doctest::Approx(0.25));
    CHECK(h[1] == doctest::Approx(0.75));
    CHECK(h[2] == 0.0);
    m.normalize();
    CHECK(m.normalized);
    CHECK(m.weights[0] + m.weights[1] == doctest::Approx(1.0));
}

TEST_CASE("mixture distance estimator") {
    const std::vector<double> gaps{0.0, 0.0, 0.0};
    const std::vector<char> same{0, 0, 0}, some{1, 0, 0};
    CHECK(mixture_distance_from_samples(gaps, same, 1.0).estimate == 0.0);
    const std::vector<double> g2{1.0, 2.0, 3.0, 2.0};
    const std::vector<char> none{0, 0, 0, 0};
    const auto e = mixture_distance_from_samples(g2, none, 2.0);
    CHECK(e.mismatch_term == 0.0);
    CHECK(e.estimate == doctest::Approx(std::sqrt((1.0 + 4.0 + 9.0 + 4.0) / 4.0)));
    const auto f = mixture_distance_from_samples(gaps, some, 1.0, 500, 7);
    CHECK(f.estimate == doctest::Approx(1.0 / 3.0));
    CHECK(f.half_width == doctest::Approx(3.0 * f.std_error));
    CHECK(f.std_error > 0.0);
    const auto g = mixture_distance_from_samples(gaps, some, 1.0, 500, 7);
    CHECK(f.std_error == g.std_error);
}

TEST_CASE("mixture distance from coupled paths") {
    const auto toy = toy_model();
    const std::vector<double> times{1.0, 5.0};
    std::vector<CoupledPath> same, apart;
    for (int r = 0; r < 400; ++r) {
        Rng r1(derive_seed(4, r)), r2(derive_seed(5, r));
        same.push_back(couple_constant(toy, {Vec::Zero(2), 1}, {Vec::Zero(2), 1}, 6.0, times, r1, false));
        apart.push_back(couple_constant(toy, {Vec::Zero(2), 1}, {Vec{{1.0, 0.0}}, 0}, 6.0, times, r2, false));
    }
    const auto zero = mixture_distance_upper(same, 1.0, 5.0);
    CHECK(zero.estimate == 0.0);
    CHECK(zero.half_width == 0.0);
    const auto curve = mixture_distance_curve(apart, 1.0, times);
    CHECK(curve.estimator == "coupling-plugin");
    REQUIRE(curve.estimates.size() == 2);
    for (double v : curve.estimates) {
        CHECK(v >= 0.0);
        CHECK(v <= 2.0 * 2.0 * toy.region.radius + 1.0);
    }
    CHECK(curve.estimates[1] < curve.estimates[0]);
}
