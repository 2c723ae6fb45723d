#pragma once

#include "pdmp/core.hpp"
#include "pdmp/coupling.hpp"
#include "pdmp/simulator.hpp"

#include <span>
#include <string>
#include <vector>

namespace pdmp {

/// Weighted sample of the hybrid state.
struct EmpiricalMeasure {
    std::vector<Vec> points;
    std::vector<ModeId> modes;
    std::vector<double> weights;
    bool normalized = false;

    void add(const Vec& x, ModeId i, double weight = 1.0);
    void normalize();
    /// Mode masses over {0, ..., n_modes - 1}; normalizes a copy if needed.
    std::vector<double> mode_histogram(int n_modes) const;

    /// Records of every trajectory at the sample nearest t, equal weights.
    static EmpiricalMeasure at_time(std::span<const Trajectory> trajectories, double t);
};

/// W_p between two equal-weight samples on the line. Unequal sizes are refined to a
/// common grid of n*m atoms (weight splitting), so the result stays exact.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, double p);

inline constexpr std::size_t kAssignmentCap = 4096;

/// Exact W_p between equal-size point clouds by optimal assignment on the |x - y|^p costs.
double wasserstein_assignment(std::span<const Vec> a, std::span<const Vec> b, double p);

/// Minimum-cost perfect matching of a square cost matrix; row k is matched to result[k].
std::vector<int> solve_assignment(const Mat& cost);

/// (1/2) sum_i |mu(i) - nu(i)|
double tv_discrete(std::span<const double> mu, std::span<const double> nu);

struct DistanceEstimate {
    double estimate = 0.0;
    /// (E|X - X~|^p)^{1/p}
    double wasserstein_term = 0.0;
    /// P(I != I~)
    double mismatch_term = 0.0;
    double std_error = 0.0;
    /// 3 bootstrap standard errors
    double half_width = 0.0;
};

/// Plug-in upper bound of the mixture distance from realized couplings at time t:
/// (mean |X_t - X~_t|^p)^{1/p} + fraction with I_t != I~_t. The standard error comes
/// from `bootstrap` resamples drawn from `seed`.
DistanceEstimate mixture_distance_upper(std::span<const CoupledPath> paths, double p, double t,
                                        int bootstrap = 200, std::uint64_t seed = 0x5eed);

/// Same estimator from per-replica gaps |X_t - X~_t| and mismatch flags.
DistanceEstimate mixture_distance_from_samples(std::span<const double> gaps, std::span<const char> mismatch,
                                               double p, int bootstrap = 200, std::uint64_t seed = 0x5eed);

/// One estimated curve: t, estimate, ci_low, ci_high, estimator.
struct DistanceCurve {
    std::string estimator = "coupling-plugin";
    std::vector<double> times;
    std::vector<double> estimates;
    std::vector<double> half_widths;
};

DistanceCurve mixture_distance_curve(std::span<const CoupledPath> paths, double p, std::span<const double> times,
                                     int bootstrap = 200, std::uint64_t seed = 0x5eed);

}  // namespace pdmp
