#pragma once

#include "pdmp/core.hpp"
#include "pdmp/random.hpp"

#include <functional>
#include <optional>
#include <span>

namespace pdmp {

/// F(x) = M x + v.
struct AffineData {
    Mat matrix;
    Vec offset;
};

/// One mode's vector field, optionally tagged with its dissipativity constant alpha_i,
/// i.e. <x - y, F(x) - F(y)> <= -alpha_i |x - y|^2.
class VectorField {
public:
    using Function = std::function<Vec(const Vec&)>;

    static VectorField affine(Mat matrix, Vec offset, std::optional<double> alpha = std::nullopt);
    static VectorField general(int dim, Function f, std::optional<double> alpha = std::nullopt);

    Vec operator()(const Vec& x) const;
    /// out = F(x) without allocating for affine fields. `out` must not alias x.
    void evaluate(const Vec& x, Vec& out) const;

    int dim() const noexcept { return dim_; }
    bool is_affine() const noexcept { return affine_.has_value(); }
    const AffineData& affine_data() const { return *affine_; }
    std::optional<double> alpha() const noexcept { return alpha_; }

private:
    int dim_ = 0;
    Function eval_;
    std::optional<AffineData> affine_;
    std::optional<double> alpha_;
};

/// Fixed-step classical RK4. `step` is the nominal h; an interval of length dt is
/// cut into max(min_steps, ceil(dt / step)) equal steps.
struct FlowIntegrator {
    double step = 1e-3;
    double tolerance = 1e-8;
    int min_steps = 16;
    /// Affine fields of dimension <= exact_affine_max_dim use the matrix exponential.
    int exact_affine_max_dim = 8;
};

/// phi_dt(x) for the field. Zero-time flow is the identity.
/// Throws IntegrationDiverged on a non-finite intermediate value.
Vec flow_step(const VectorField& field, const Vec& x, double dt, const FlowIntegrator& integrator = {});

/// Always RK4, even for affine fields.
Vec rk4_flow(const VectorField& field, const Vec& x, double dt, const FlowIntegrator& integrator = {});

/// Closed-form affine flow exp(dt M) x + (int_0^dt exp(sM) ds) v.
Vec affine_flow(const AffineData& affine, const Vec& x, double dt);

/// Richardson-style local error estimate |y_h - y_{h/2}| / 15 for the RK4 path.
double flow_error_estimate(const VectorField& field, const Vec& x, double dt,
                           const FlowIntegrator& integrator = {});

struct DissipativityAudit {
    bool pass = false;
    /// max over sampled pairs of <x - y, F(x) - F(y)> + alpha |x - y|^2
    double worst_margin = 0.0;
    int samples = 0;
};

/// Samples pairs uniformly in the ball B(center, radius) and checks the one-sided
/// Lipschitz bound with constant alpha.
DissipativityAudit audit_dissipativity(const VectorField& field, double alpha, double radius,
                                       int n_samples, Rng& rng, double tolerance = 1e-9,
                                       const Vec* center = nullptr);

/// max_i |F^i(0)| / alpha.
double invariant_radius(std::span<const VectorField> fields, double alpha);

/// Uniform point in the d-dimensional ball.
Vec sample_ball(int dim, double radius, Rng& rng);

}  // namespace pdmp
