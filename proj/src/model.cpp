#include "pdmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdmp {

double StateDependentRates::total(const Vec& x, ModeId i) const {
    double sum = 0.0;
    for (ModeId j : targets[i]) sum += rate(x, i, j);
    return sum;
}

std::vector<std::vector<ModeId>> StateDependentRates::complete_targets(int n_modes) {
    std::vector<std::vector<ModeId>> t(n_modes);
    for (int i = 0; i < n_modes; ++i) {
        for (int j = 0; j < n_modes; ++j) {
            if (j != i) t[i].push_back(j);
        }
    }
    return t;
}

double SwitchedModel::rate(const Vec& x, ModeId i, ModeId j) const {
    if (constant_rates()) return i == j ? 0.0 : generator().matrix()(i, j);
    return state_rates().rate(x, i, j);
}

double SwitchedModel::total_rate(const Vec& x, ModeId i) const {
    if (constant_rates()) return -generator().matrix()(i, i);
    return state_rates().total(x, i);
}

std::vector<ModeId> SwitchedModel::targets(ModeId i) const {
    if (!constant_rates()) return state_rates().targets[i];
    std::vector<ModeId> out;
    const Mat& a = generator().matrix();
    for (int j = 0; j < a.cols(); ++j) {
        if (j != i && a(i, j) > 0.0) out.push_back(j);
    }
    return out;
}

namespace {

std::vector<Vec> grid_in_ball(const Region& region, int dim, int grid_points) {
    const int per_axis =
        std::max(2, static_cast<int>(std::ceil(std::pow(static_cast<double>(grid_points), 1.0 / dim))));
    std::vector<Vec> points;
    std::vector<int> idx(dim, 0);
    while (true) {
        Vec offset(dim);
        for (int k = 0; k < dim; ++k)
            offset(k) = region.radius * (-1.0 + 2.0 * idx[k] / (per_axis - 1.0));
        if (offset.norm() <= region.radius * (1.0 + 1e-12)) points.push_back(region.center + offset);
        int k = 0;
        while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == dim) break;
    }
    return points;
}

}  // namespace

RateAudit audit_rates(const SwitchedModel& model, int grid_points) {
    RateAudit audit;
    if (model.constant_rates()) {
        audit.pass = model.generator().irreducible();
        audit.message = audit.pass ? "constant generator irreducible" : "constant generator reducible";
        return audit;
    }
    const auto& rates = model.state_rates();
    const auto points = grid_in_ball(model.region, model.dim, grid_points);
    const double spacing = 2.0 * model.region.radius /
                           (std::max(2.0, std::ceil(std::pow(static_cast<double>(grid_points), 1.0 / model.dim))) - 1.0);
    for (const Vec& x : points) {
        for (ModeId i = 0; i < model.modes(); ++i) {
            double total = 0.0;
            for (ModeId j : rates.targets[i]) {
                const double a = rates.rate(x, i, j);
                total += a;
                audit.measured_lower = std::min(audit.measured_lower, a);
            }
            audit.measured_upper = std::max(audit.measured_upper, total);
            for (int k = 0; k < model.dim; ++k) {
                Vec y = x;
                y(k) += spacing;
                if ((y - model.region.center).norm() > model.region.radius) continue;
                double diff = 0.0;
                for (ModeId j : rates.targets[i]) diff += std::abs(rates.rate(x, i, j) - rates.rate(y, i, j));
                audit.measured_lipschitz = std::max(audit.measured_lipschitz, diff / spacing);
            }
        }
    }
    audit.points = static_cast<int>(points.size());
    const bool lower_ok = audit.measured_lower >= rates.lower_bound * (1.0 - 1e-12) && rates.lower_bound > 0.0;
    const bool upper_ok = audit.measured_upper <= rates.upper_bound * (1.0 + 1e-12);
    const bool lip_ok = audit.measured_lipschitz <= rates.lipschitz * (1.0 + 1e-9);
    audit.pass = lower_ok && upper_ok && lip_ok;
    std::ostringstream msg;
    msg << "rates: min " << audit.measured_lower << " (declared " << rates.lower_bound << "), max total "
        << audit.measured_upper << " (declared " << rates.upper_bound << "), lipschitz "
        << audit.measured_lipschitz << " (declared " << rates.lipschitz << ")";
    audit.message = msg.str();
    return audit;
}

ModelAudit audit_model(const SwitchedModel& model, Rng& rng, int samples) {
    ModelAudit report;
    auto add = [&](bool ok, const std::string& line) {
        report.pass = report.pass && ok;
        report.lines.push_back(std::string(ok ? "PASS " : "FAIL ") + line);
    };
    for (ModeId i = 0; i < model.modes(); ++i) {
        const double alpha = model.constant_rates() ? model.alpha_modes(i) : model.alpha;
        const auto d = audit_dissipativity(model.fields[i], alpha, model.region.radius, samples, rng, 1e-9,
                                           &model.region.center);
        std::ostringstream line;
        line << "dissipativity mode " << i << " alpha " << alpha << " worst margin " << d.worst_margin;
        add(d.pass, line.str());
    }
    const auto r = audit_rates(model);
    add(r.pass, r.message);
    if (model.constant_rates()) {
        try {
            const Vec nu = invariant_measure(model.generator());
            const double avg = model.alpha_modes.dot(nu);
            std::ostringstream line;
            line << "averaged dissipativity sum alpha nu = " << avg;
            add(avg > 0.0, line.str());
        } catch (const InvalidAssumption& e) {
            add(false, e.what());
        }
    }
    return report;
}

}  // namespace pdmp
