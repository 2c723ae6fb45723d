#pragma once

#include "pdmp/core.hpp"
#include "pdmp/random.hpp"

#include <span>
#include <vector>

namespace pdmp {

/// Generator of an autonomous finite-state jump chain:
/// A(i,i) = -lambda(i), A(i,j) = lambda(i) P(i,j) for j != i.
class SwitchGenerator {
public:
    SwitchGenerator() = default;

    /// Validates zero row sums (1e-12) and non-negative off-diagonal entries.
    static SwitchGenerator from_matrix(Mat a);
    /// A(i,j) = lambda(i) P(i,j) off the diagonal; a self-jump P(i,i) > 0 is not a jump.
    static SwitchGenerator from_rates(const Vec& lambda, const Mat& jump);

    int size() const noexcept { return static_cast<int>(a_.rows()); }
    const Mat& matrix() const noexcept { return a_; }
    /// lambda(i) = -A(i,i)
    Vec total_rates() const { return -a_.diagonal(); }
    /// P(i,j) = A(i,j) / lambda(i); rows with lambda(i) = 0 are zero.
    Mat jump_matrix() const;

    /// Graph reachability on the support of A.
    bool irreducible() const;

private:
    Mat a_;
};

/// nu with nu A = 0, sum nu = 1, by a bordered least-squares solve.
Vec invariant_measure(const SwitchGenerator& gen);

/// A - p diag(alpha)
Mat tilted_generator(const SwitchGenerator& gen, const Vec& alpha, double p);

/// -max Re over the spectrum of A - p diag(alpha).
double theta_p(const SwitchGenerator& gen, const Vec& alpha, double p);

/// Moment threshold: +inf when min alpha >= 0, else the root of p -> theta_p on
/// (0, min{ -A(i,i)/|alpha(i)| : alpha(i) < 0 }). Requires sum alpha nu > 0.
double kappa_moment(const SwitchGenerator& gen, const Vec& alpha, double tolerance = 1e-8);

/// Product chain of two independent copies restricted to off-diagonal pairs (i, j),
/// killed on the diagonal. Row/column k of the result is pair off_diagonal_pairs(n)[k].
Mat killed_product_generator(const SwitchGenerator& gen);
std::vector<std::pair<ModeId, ModeId>> off_diagonal_pairs(int n);

/// Envelope P(T > t | I0 = i, I~0 = j) <= constant * exp(-rate t) for the
/// meeting time T of two independent copies.
struct CoalescenceReport {
    double rate = 0.0;
    double constant = 1.0;
};

enum class CoalescenceMethod { exact, monte_carlo };

/// Exact: spectral abscissa of the killed product generator; the constant is the
/// sup over pairs and a time grid of S(t) e^{rate t}, clipped below at 1.
CoalescenceReport coalescence_rate_exact(const SwitchGenerator& gen);

/// Monte Carlo: simulates `pairs_per_start` meeting times for every ordered pair i != j
/// and fits the tail rate by the memoryless MLE beyond the pooled median.
CoalescenceReport coalescence_rate_monte_carlo(const SwitchGenerator& gen, int pairs_per_start,
                                               Rng& rng);

CoalescenceReport coalescence_rate(const SwitchGenerator& gen, CoalescenceMethod method, Rng& rng,
                                   int pairs_per_start = 20000);

/// First meeting time of two independent copies started at (i, j).
double sample_meeting_time(const SwitchGenerator& gen, ModeId i, ModeId j, Rng& rng);

/// Right-continuous path of the chain: modes[k] holds on [times[k], times[k+1]).
struct DiscretePath {
    std::vector<double> times;
    std::vector<ModeId> modes;
    double horizon = 0.0;

    ModeId mode_at(double t) const;
};

/// Draws the next mode from P(i, .) using one uniform.
ModeId sample_jump_target(const SwitchGenerator& gen, ModeId i, Rng& rng);

DiscretePath sample_ctmc_path(const SwitchGenerator& gen, ModeId i0, double horizon, Rng& rng);

/// (exp(t A_p) 1)(i) for every start mode i.
Vec feynman_kac_vector(const SwitchGenerator& gen, const Vec& alpha, double p, double t);

/// e(p,t) = max_i E_i exp(-p int_0^t alpha(I_u) du).
double e_pt(const SwitchGenerator& gen, const Vec& alpha, double p, double t);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of E_i exp(-p int_0^t alpha(I_u) du) at each time, for
/// every start mode: result[i][k] is mode i at times[k]. Path n of start i uses
/// the generator seeded by derive_seed(seed, i * paths + n).
std::vector<std::vector<McEstimate>> e_pt_monte_carlo(const SwitchGenerator& gen, const Vec& alpha,
                                                      double p, std::span<const double> times,
                                                      int paths, std::uint64_t seed);

/// max over the grid of e(p,t) e^{theta_p t}, clipped below at 1. A grid
/// under-estimate of the true C2(p).
double c2_estimate(const SwitchGenerator& gen, const Vec& alpha, double p,
                   std::span<const double> grid);

struct SpectralEntry {
    double p = 0.0;
    double theta = 0.0;
    double c2 = 1.0;
};

struct SpectralReport {
    Vec nu;
    std::vector<SpectralEntry> entries;
    double kappa_moment = kInf;
    double rho = 0.0;
    double rho_constant = 1.0;

    const SpectralEntry& at(double p) const;
};

SpectralReport spectral_report(const SwitchGenerator& gen, const Vec& alpha,
                               std::span<const double> ps, std::span<const double> c2_grid);

}  // namespace pdmp
