#include "pdmp/flows.hpp"

#include "pdmp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pdmp {

VectorField VectorField::affine(Mat matrix, Vec offset, std::optional<double> alpha) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != offset.size())
        throw InvalidAssumption("affine field: matrix must be d x d and offset of length d");
    VectorField f;
    f.dim_ = static_cast<int>(offset.size());
    f.affine_ = AffineData{std::move(matrix), std::move(offset)};
    f.alpha_ = alpha;
    return f;
}

VectorField VectorField::general(int dim, Function fn, std::optional<double> alpha) {
    VectorField f;
    f.dim_ = dim;
    f.eval_ = std::move(fn);
    f.alpha_ = alpha;
    return f;
}

Vec VectorField::operator()(const Vec& x) const {
    if (affine_) return affine_->matrix * x + affine_->offset;
    return eval_(x);
}

void VectorField::evaluate(const Vec& x, Vec& out) const {
    if (affine_) {
        out.noalias() = affine_->matrix * x;
        out += affine_->offset;
    } else {
        out = eval_(x);
    }
}

namespace {

void require_finite(const Vec& y) {
    if (!y.allFinite()) throw IntegrationDiverged("flow integration produced a non-finite value");
}

Vec rk4_steps(const VectorField& field, Vec y, double dt, int steps) {
    const double h = dt / steps;
    const Eigen::Index d = y.size();
    Vec k1(d), k2(d), k3(d), k4(d), tmp(d);
    for (int k = 0; k < steps; ++k) {
        field.evaluate(y, k1);
        tmp = y + 0.5 * h * k1;
        field.evaluate(tmp, k2);
        tmp = y + 0.5 * h * k2;
        field.evaluate(tmp, k3);
        tmp = y + h * k3;
        field.evaluate(tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        require_finite(y);
    }
    return y;
}

int step_count(double dt, const FlowIntegrator& integrator) {
    const double n = std::ceil(dt / integrator.step);
    return std::max(integrator.min_steps, static_cast<int>(std::min(n, 1e9)));
}

}  // namespace

Vec affine_flow(const AffineData& affine, const Vec& x, double dt) {
    const Eigen::Index d = x.size();
    if (d == 1) {
        const double m = affine.matrix(0, 0);
        const double v = affine.offset(0);
        Vec y(1);
        if (m == 0.0) {
            y(0) = x(0) + v * dt;
        } else {
            const double e = std::exp(m * dt);
            y(0) = x(0) * e + v * std::expm1(m * dt) / m;
        }
        return y;
    }
    // exp of the augmented generator [[M, v], [0, 0]] carries the offset integral.
    Mat aug = Mat::Zero(d + 1, d + 1);
    aug.topLeftCorner(d, d) = affine.matrix * dt;
    aug.topRightCorner(d, 1) = affine.offset * dt;
    const Mat e = expm(aug);
    return e.topLeftCorner(d, d) * x + e.topRightCorner(d, 1);
}

Vec flow_step(const VectorField& field, const Vec& x, double dt, const FlowIntegrator& integrator) {
    if (dt < 0.0) throw RangeError("flow_step: negative duration");
    if (dt == 0.0) return x;
    if (field.is_affine() && field.dim() <= integrator.exact_affine_max_dim) {
        Vec y = affine_flow(field.affine_data(), x, dt);
        require_finite(y);
        return y;
    }
    return rk4_steps(field, x, dt, step_count(dt, integrator));
}

Vec rk4_flow(const VectorField& field, const Vec& x, double dt, const FlowIntegrator& integrator) {
    if (dt < 0.0) throw RangeError("rk4_flow: negative duration");
    if (dt == 0.0) return x;
    return rk4_steps(field, x, dt, step_count(dt, integrator));
}

double flow_error_estimate(const VectorField& field, const Vec& x, double dt,
                           const FlowIntegrator& integrator) {
    if (dt == 0.0) return 0.0;
    const int n = step_count(dt, integrator);
    const Vec coarse = rk4_steps(field, x, dt, n);
    const Vec fine = rk4_steps(field, x, dt, 2 * n);
    return (coarse - fine).norm() / 15.0;
}

Vec sample_ball(int dim, double radius, Rng& rng) {
    // Box-Muller direction, radius by inversion of r^d.
    Vec g(dim);
    for (int k = 0; k < dim; ++k) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        g(k) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    const double norm = g.norm();
    if (norm == 0.0) return Vec::Zero(dim);
    const double rad = radius * std::pow(rng.uniform(), 1.0 / dim);
    return g * (rad / norm);
}

DissipativityAudit audit_dissipativity(const VectorField& field, double alpha, double radius,
                                       int n_samples, Rng& rng, double tolerance, const Vec* center) {
    DissipativityAudit report;
    report.worst_margin = -kInf;
    const Vec origin = center ? *center : Vec::Zero(field.dim());
    for (int s = 0; s < n_samples; ++s) {
        const Vec x = origin + sample_ball(field.dim(), radius, rng);
        const Vec y = origin + sample_ball(field.dim(), radius, rng);
        const Vec diff = x - y;
        const double margin = diff.dot(field(x) - field(y)) + alpha * diff.squaredNorm();
        report.worst_margin = std::max(report.worst_margin, margin);
    }
    report.samples = n_samples;
    report.pass = report.worst_margin <= tolerance;
    return report;
}

double invariant_radius(std::span<const VectorField> fields, double alpha) {
    if (!(alpha > 0.0)) throw InvalidAssumption("invariant_radius: alpha must be positive");
    double worst = 0.0;
    for (const auto& f : fields) worst = std::max(worst, f(Vec::Zero(f.dim())).norm());
    return worst / alpha;
}

}  // namespace pdmp
