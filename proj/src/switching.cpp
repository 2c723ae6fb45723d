#include "pdmp/switching.hpp"

#include "pdmp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace pdmp {

SwitchGenerator SwitchGenerator::from_matrix(Mat a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw InvalidAssumption("generator must be a non-empty square matrix");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i != j && a(i, j) < 0.0)
                throw InvalidAssumption("generator has a negative off-diagonal entry");
        }
        const double scale = std::max(1.0, a.row(i).cwiseAbs().maxCoeff());
        if (std::abs(a.row(i).sum()) > 1e-12 * scale)
            throw InvalidAssumption("generator row " + std::to_string(i) + " does not sum to zero");
    }
    SwitchGenerator g;
    g.a_ = std::move(a);
    return g;
}

SwitchGenerator SwitchGenerator::from_rates(const Vec& lambda, const Mat& jump) {
    const Eigen::Index n = lambda.size();
    if (jump.rows() != n || jump.cols() != n)
        throw InvalidAssumption("jump matrix must be n x n with n = len(lambda)");
    Mat a = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lambda(i) < 0.0) throw InvalidAssumption("negative total rate");
        if ((jump.row(i).array() < 0.0).any()) throw InvalidAssumption("negative jump probability");
        if (std::abs(jump.row(i).sum() - 1.0) > 1e-12)
            throw InvalidAssumption("jump matrix row " + std::to_string(i) + " is not stochastic");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) a(i, j) = lambda(i) * jump(i, j);
        }
        a(i, i) = -(a.row(i).sum());
    }
    return from_matrix(std::move(a));
}

Mat SwitchGenerator::jump_matrix() const {
    const Eigen::Index n = a_.rows();
    Mat p = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = -a_(i, i);
        if (lambda <= 0.0) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) p(i, j) = a_(i, j) / lambda;
        }
    }
    return p;
}

bool SwitchGenerator::irreducible() const {
    const int n = size();
    auto reaches_all = [&](bool transpose) {
        std::vector<bool> seen(n, false);
        std::queue<int> todo;
        todo.push(0);
        seen[0] = true;
        while (!todo.empty()) {
            const int i = todo.front();
            todo.pop();
            for (int j = 0; j < n; ++j) {
                const double w = transpose ? a_(j, i) : a_(i, j);
                if (j != i && w > 0.0 && !seen[j]) {
                    seen[j] = true;
                    todo.push(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reaches_all(false) && reaches_all(true);
}

Vec invariant_measure(const SwitchGenerator& gen) {
    if (!gen.irreducible()) throw InvalidAssumption("generator is reducible");
    const int n = gen.size();
    // [A^T; 1^T] nu = [0; 1]
    Mat bordered(n + 1, n);
    bordered.topRows(n) = gen.matrix().transpose();
    bordered.row(n).setOnes();
    Vec rhs = Vec::Zero(n + 1);
    rhs(n) = 1.0;
    Vec nu = bordered.colPivHouseholderQr().solve(rhs);
    nu = nu.cwiseMax(0.0);
    return nu / nu.sum();
}

Mat tilted_generator(const SwitchGenerator& gen, const Vec& alpha, double p) {
    if (alpha.size() != gen.size()) throw InvalidAssumption("alpha must have one entry per mode");
    Mat ap = gen.matrix();
    ap.diagonal() -= p * alpha;
    return ap;
}

double theta_p(const SwitchGenerator& gen, const Vec& alpha, double p) {
    return -spectral_abscissa(tilted_generator(gen, alpha, p));
}

double kappa_moment(const SwitchGenerator& gen, const Vec& alpha, double tolerance) {
    const Vec nu = invariant_measure(gen);
    if (!(alpha.dot(nu) > 0.0))
        throw InvalidAssumption("averaged dissipativity fails: sum alpha(i) nu(i) <= 0");
    if (alpha.minCoeff() >= 0.0) return kInf;

    double hi = kInf;
    for (int i = 0; i < gen.size(); ++i) {
        if (alpha(i) < 0.0) hi = std::min(hi, gen.matrix()(i, i) / alpha(i));
    }
    double lo = 0.0;
    if (theta_p(gen, alpha, hi) > 0.0)
        throw NumericError("theta_p does not change sign on the bisection interval");
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (theta_p(gen, alpha, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::pair<ModeId, ModeId>> off_diagonal_pairs(int n) {
    std::vector<std::pair<ModeId, ModeId>> pairs;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

Mat killed_product_generator(const SwitchGenerator& gen) {
    const int n = gen.size();
    const Mat& a = gen.matrix();
    const auto pairs = off_diagonal_pairs(n);
    auto index_of = [n](int i, int j) { return i * (n - 1) + (j < i ? j : j - 1); };
    Mat q = Mat::Zero(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        q(k, k) = a(i, i) + a(j, j);
        for (int m = 0; m < n; ++m) {
            if (m != i && m != j) q(k, index_of(m, j)) += a(i, m);
            if (m != j && m != i) q(k, index_of(i, m)) += a(j, m);
        }
    }
    return q;
}

CoalescenceReport coalescence_rate_exact(const SwitchGenerator& gen) {
    if (!gen.irreducible()) throw InvalidAssumption("generator is reducible");
    CoalescenceReport report;
    if (gen.size() == 1) {
        report.rate = kInf;
        return report;
    }
    const Mat q = killed_product_generator(gen);
    report.rate = -spectral_abscissa(q);
    if (!(report.rate > 0.0)) throw NumericError("killed product generator is not transient");

    // sup_t max_k S_k(t) e^{rate t} on a geometric-ish grid out to 40 / rate
    constexpr int kGrid = 400;
    const double horizon = 40.0 / report.rate;
    const Vec ones = Vec::Ones(q.rows());
    const Mat step = expm(q * (horizon / kGrid));
    Vec survival = ones;
    double constant = 1.0;
    for (int k = 1; k <= kGrid; ++k) {
        survival = step * survival;
        const double t = horizon * k / kGrid;
        constant = std::max(constant, survival.maxCoeff() * std::exp(report.rate * t));
    }
    report.constant = constant;
    return report;
}

double sample_meeting_time(const SwitchGenerator& gen, ModeId i, ModeId j, Rng& rng) {
    const Vec lambda = gen.total_rates();
    double t = 0.0;
    while (i != j) {
        const double total = lambda(i) + lambda(j);
        if (total <= 0.0) return kInf;
        t += rng.exponential(total);
        if (rng.uniform() * total < lambda(i))
            i = sample_jump_target(gen, i, rng);
        else
            j = sample_jump_target(gen, j, rng);
    }
    return t;
}

CoalescenceReport coalescence_rate_monte_carlo(const SwitchGenerator& gen, int pairs_per_start,
                                               Rng& rng) {
    const int n = gen.size();
    CoalescenceReport report;
    if (n == 1) {
        report.rate = kInf;
        return report;
    }
    const auto pairs = off_diagonal_pairs(n);
    std::vector<std::vector<double>> times(pairs.size());
    std::vector<double> pooled;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        times[k].reserve(pairs_per_start);
        for (int s = 0; s < pairs_per_start; ++s) {
            const double t = sample_meeting_time(gen, pairs[k].first, pairs[k].second, rng);
            times[k].push_back(t);
            pooled.push_back(t);
        }
        std::sort(times[k].begin(), times[k].end());
    }
    std::sort(pooled.begin(), pooled.end());
    const double t0 = pooled[pooled.size() / 2];
    double excess = 0.0;
    std::size_t tail = 0;
    for (double t : pooled) {
        if (t > t0) {
            excess += t - t0;
            ++tail;
        }
    }
    if (tail == 0 || !(excess > 0.0)) throw NumericError("no tail samples for the rate fit");
    report.rate = static_cast<double>(tail) / excess;

    // Empirical constant, restricted to times with at least 100 survivors per pair.
    double constant = 1.0;
    for (const auto& ts : times) {
        const std::size_t m = ts.size();
        for (std::size_t idx = 0; idx + 100 < m; idx += std::max<std::size_t>(1, m / 200)) {
            const double t = ts[idx];
            const double survival = static_cast<double>(m - idx - 1) / static_cast<double>(m);
            constant = std::max(constant, survival * std::exp(report.rate * t));
        }
    }
    report.constant = constant;
    return report;
}

CoalescenceReport coalescence_rate(const SwitchGenerator& gen, CoalescenceMethod method, Rng& rng,
                                   int pairs_per_start) {
    if (method == CoalescenceMethod::exact) return coalescence_rate_exact(gen);
    return coalescence_rate_monte_carlo(gen, pairs_per_start, rng);
}

ModeId DiscretePath::mode_at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return modes.front();
    return modes[static_cast<std::size_t>(it - times.begin()) - 1];
}

ModeId sample_jump_target(const SwitchGenerator& gen, ModeId i, Rng& rng) {
    const Mat& a = gen.matrix();
    const int n = gen.size();
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = j == i ? 0.0 : a(i, j);
    return static_cast<ModeId>(rng.choose(w));
}

DiscretePath sample_ctmc_path(const SwitchGenerator& gen, ModeId i0, double horizon, Rng& rng) {
    if (horizon < 0.0) throw RangeError("negative horizon");
    DiscretePath path;
    path.horizon = horizon;
    path.times.push_back(0.0);
    path.modes.push_back(i0);
    const Vec lambda = gen.total_rates();
    double t = 0.0;
    ModeId i = i0;
    while (true) {
        const double hold = rng.exponential(lambda(i));
        if (!(t + hold < horizon)) break;
        t += hold;
        i = sample_jump_target(gen, i, rng);
        path.times.push_back(t);
        path.modes.push_back(i);
    }
    return path;
}

Vec feynman_kac_vector(const SwitchGenerator& gen, const Vec& alpha, double p, double t) {
    if (t < 0.0) throw RangeError("negative time");
    return expm(tilted_generator(gen, alpha, p) * t) * Vec::Ones(gen.size());
}

double e_pt(const SwitchGenerator& gen, const Vec& alpha, double p, double t) {
    return feynman_kac_vector(gen, alpha, p, t).maxCoeff();
}

std::vector<std::vector<McEstimate>> e_pt_monte_carlo(const SwitchGenerator& gen, const Vec& alpha,
                                                      double p, std::span<const double> times,
                                                      int paths, std::uint64_t seed) {
    if (!std::is_sorted(times.begin(), times.end())) throw RangeError("times must be sorted");
    const int n = gen.size();
    const Vec lambda = gen.total_rates();
    const double horizon = times.empty() ? 0.0 : times.back();
    std::vector<std::vector<McEstimate>> out(n, std::vector<McEstimate>(times.size()));
    std::vector<double> sum(times.size()), sum_sq(times.size());
    for (int start = 0; start < n; ++start) {
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
        for (int path = 0; path < paths; ++path) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(start) * paths + path));
            ModeId i = start;
            double t = 0.0;
            double integral = 0.0;
            std::size_t next = 0;
            while (next < times.size()) {
                const double hold = rng.exponential(lambda(i));
                const double end = std::min(t + hold, horizon);
                while (next < times.size() && times[next] <= end) {
                    const double value = std::exp(-p * (integral + alpha(i) * (times[next] - t)));
                    sum[next] += value;
                    sum_sq[next] += value * value;
                    ++next;
                }
                if (next == times.size()) break;
                integral += alpha(i) * hold;
                t += hold;
                i = sample_jump_target(gen, i, rng);
            }
        }
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double mean = sum[k] / paths;
            const double var = std::max(0.0, sum_sq[k] / paths - mean * mean) * paths / (paths - 1.0);
            out[start][k] = {mean, std::sqrt(var / paths)};
        }
    }
    return out;
}

double c2_estimate(const SwitchGenerator& gen, const Vec& alpha, double p,
                   std::span<const double> grid) {
    const double theta = theta_p(gen, alpha, p);
    double best = 1.0;
    for (double t : grid) {
        if (!(t > 0.0) || !std::isfinite(t)) throw RangeError("c2 grid must be finite and positive");
        best = std::max(best, e_pt(gen, alpha, p, t) * std::exp(theta * t));
    }
    return best;
}

const SpectralEntry& SpectralReport::at(double p) const {
    for (const auto& e : entries) {
        if (std::abs(e.p - p) <= 1e-12 * std::max(1.0, std::abs(p))) return e;
    }
    throw RangeError("spectral report has no entry for p = " + std::to_string(p));
}

SpectralReport spectral_report(const SwitchGenerator& gen, const Vec& alpha,
                               std::span<const double> ps, std::span<const double> c2_grid) {
    SpectralReport report;
    report.nu = invariant_measure(gen);
    report.kappa_moment = kappa_moment(gen, alpha);
    const auto rho = coalescence_rate_exact(gen);
    report.rho = rho.rate;
    report.rho_constant = rho.constant;
    for (double p : ps) {
        report.entries.push_back({p, theta_p(gen, alpha, p), c2_estimate(gen, alpha, p, c2_grid)});
    }
    return report;
}

}  // namespace pdmp
