#include "pdmp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdmp {

void EmpiricalMeasure::add(const Vec& x, ModeId i, double weight) {
    if (weight < 0.0) throw RangeError("negative weight");
    points.push_back(x);
    modes.push_back(i);
    weights.push_back(weight);
    normalized = false;
}

void EmpiricalMeasure::normalize() {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw RangeError("empirical measure has no mass");
    for (double& w : weights) w /= total;
    normalized = true;
}

std::vector<double> EmpiricalMeasure::mode_histogram(int n_modes) const {
    std::vector<double> hist(n_modes, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (modes[k] < 0 || modes[k] >= n_modes) throw RangeError("mode outside the histogram range");
        hist[modes[k]] += weights[k];
        total += weights[k];
    }
    if (total > 0.0)
        for (double& h : hist) h /= total;
    return hist;
}

EmpiricalMeasure EmpiricalMeasure::at_time(std::span<const Trajectory> trajectories, double t) {
    EmpiricalMeasure m;
    for (const auto& traj : trajectories) {
        const auto& e = traj.nearest_sample(t);
        m.add(e.x, e.mode);
    }
    m.normalize();
    return m;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b, double p) {
    if (a.empty() || b.empty()) throw RangeError("wasserstein_1d needs non-empty samples");
    if (!(p >= 1.0)) throw RangeError("p must be at least 1");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const std::uint64_t n = x.size();
    const std::uint64_t m = y.size();
    // every atom of x carries m units of mass, every atom of y carries n
    std::uint64_t left_x = m;
    std::uint64_t left_y = n;
    std::size_t i = 0;
    std::size_t j = 0;
    long double acc = 0.0L;
    while (i < n && j < m) {
        const std::uint64_t w = std::min(left_x, left_y);
        const double gap = std::abs(x[i] - y[j]);
        acc += static_cast<long double>(w) * (p == 1.0 ? gap : std::pow(gap, p));
        left_x -= w;
        left_y -= w;
        if (left_x == 0) {
            ++i;
            left_x = m;
        }
        if (left_y == 0) {
            ++j;
            left_y = n;
        }
    }
    const double mean = static_cast<double>(acc / (static_cast<long double>(n) * m));
    return p == 1.0 ? mean : std::pow(mean, 1.0 / p);
}

std::vector<int> solve_assignment(const Mat& cost) {
    // shortest augmenting paths with row/column potentials, 1-based with a sentinel column 0
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw RangeError("assignment needs a square cost matrix");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int row = 1; row <= n; ++row) {
        match[0] = row;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> result(n);
    for (int j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
    return result;
}

double wasserstein_assignment(std::span<const Vec> a, std::span<const Vec> b, double p) {
    if (a.empty() || a.size() != b.size()) throw RangeError("assignment needs equal non-empty samples");
    if (a.size() > kAssignmentCap)
        throw RangeError("assignment limited to " + std::to_string(kAssignmentCap) +
                         " points; use 1-d projections or subsample");
    if (!(p >= 1.0)) throw RangeError("p must be at least 1");
    const int n = static_cast<int>(a.size());
    Mat cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost(i, j) = std::pow((a[i] - b[j]).norm(), p);
    const auto match = solve_assignment(cost);
    long double acc = 0.0L;
    for (int i = 0; i < n; ++i) acc += cost(i, match[i]);
    return std::pow(static_cast<double>(acc / n), 1.0 / p);
}

double tv_discrete(std::span<const double> mu, std::span<const double> nu) {
    if (mu.size() != nu.size()) throw RangeError("histograms over different mode sets");
    double sum = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) sum += std::abs(mu[k] - nu[k]);
    return 0.5 * sum;
}

namespace {

double plug_in(std::span<const double> powered, std::span<const char> mismatch, std::span<const std::size_t> idx,
               double p, double* w_term, double* m_term) {
    long double sum = 0.0L;
    std::size_t count = 0;
    const std::size_t n = idx.empty() ? powered.size() : idx.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r = idx.empty() ? k : idx[k];
        sum += powered[r];
        count += mismatch[r] ? 1 : 0;
    }
    const double mean = static_cast<double>(sum / n);
    const double w = p == 1.0 ? mean : std::pow(mean, 1.0 / p);
    const double f = static_cast<double>(count) / n;
    if (w_term) *w_term = w;
    if (m_term) *m_term = f;
    return w + f;
}

}  // namespace

DistanceEstimate mixture_distance_from_samples(std::span<const double> gaps, std::span<const char> mismatch,
                                               double p, int bootstrap, std::uint64_t seed) {
    if (gaps.empty() || gaps.size() != mismatch.size()) throw RangeError("no coupled replicas");
    if (!(p >= 1.0)) throw RangeError("p must be at least 1");
    std::vector<double> powered(gaps.size());
    for (std::size_t k = 0; k < gaps.size(); ++k) powered[k] = p == 1.0 ? gaps[k] : std::pow(gaps[k], p);
    DistanceEstimate est;
    est.estimate = plug_in(powered, mismatch, {}, p, &est.wasserstein_term, &est.mismatch_term);
    if (bootstrap > 1 && gaps.size() > 1) {
        Rng rng(seed);
        std::vector<std::size_t> idx(gaps.size());
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int b = 0; b < bootstrap; ++b) {
            for (auto& k : idx) k = rng.uniform_index(gaps.size());
            const double v = plug_in(powered, mismatch, idx, p, nullptr, nullptr);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / bootstrap;
        est.std_error = std::sqrt(std::max(0.0, (sum_sq - bootstrap * mean * mean) / (bootstrap - 1.0)));
    }
    est.half_width = 3.0 * est.std_error;
    return est;
}

DistanceEstimate mixture_distance_upper(std::span<const CoupledPath> paths, double p, double t, int bootstrap,
                                        std::uint64_t seed) {
    std::vector<double> gaps;
    std::vector<char> mismatch;
    gaps.reserve(paths.size());
    mismatch.reserve(paths.size());
    for (const auto& path : paths) {
        const CoupledState& s = path.state_at(t);
        gaps.push_back((s.x - s.x_tilde).norm());
        mismatch.push_back(s.mode != s.mode_tilde ? 1 : 0);
    }
    return mixture_distance_from_samples(gaps, mismatch, p, bootstrap, seed);
}

DistanceCurve mixture_distance_curve(std::span<const CoupledPath> paths, double p, std::span<const double> times,
                                     int bootstrap, std::uint64_t seed) {
    DistanceCurve curve;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto est = mixture_distance_upper(paths, p, times[k], bootstrap, derive_seed(seed, k));
        curve.times.push_back(times[k]);
        curve.estimates.push_back(est.estimate);
        curve.half_widths.push_back(est.half_width);
    }
    return curve;
}

}  // namespace pdmp
