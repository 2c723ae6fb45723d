#pragma once

#include "pdmp/model.hpp"
#include "pdmp/models.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pdmp {

enum class ModelKind { toy, morris_lecar, custom };
enum class ExperimentKind { simulate, couple, bounds, full_check, audit };

const char* to_string(ModelKind kind);
const char* to_string(ExperimentKind kind);

struct ToyConfig {
    Vec lambda = Vec::Ones(2);
    double alpha = 1.0;
    Vec a = Vec::Unit(2, 0);
    /// "constant" or "state-dependent" (base 1 + amplitude sin/cos)
    std::string rates = "constant";
    double amplitude = 0.4;
};

/// Affine fields and a constant generator given explicitly.
struct CustomConfig {
    std::vector<Mat> matrices;
    std::vector<Vec> offsets;
    Mat generator;
    Vec alpha;
};

/// Parsed experiment description.
///
/// Text format: `[section]` headers, `key = value` lines, `#` comments. Values are
/// numbers, bare or quoted strings, booleans, lists `[1, 2]` and matrices `[[1, 0], [0, 1]]`.
/// Sections: experiment, model, toy, morris-lecar, custom, initial, distance, grid.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::simulate;
    int replicas = 100;
    double horizon = 10.0;
    double sample_dt = 0.1;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    bool record_jumps = true;

    ModelKind model = ModelKind::toy;
    std::string sampler = "thinning";
    ToyConfig toy;
    MorrisLecarParams morris_lecar;
    int k_cap = 32;
    CustomConfig custom;

    Vec x0;
    int mode0 = 0;
    Vec x0_tilde;
    int mode0_tilde = 1;

    double p = 1.0;
    double q = 1.5;
    std::string estimator = "coupling-plugin";
    double slack = 0.02;
    /// User-supplied M(q, m); negative means estimate by Monte Carlo.
    double moment_bound = -1.0;
    int bootstrap = 200;

    /// Envelope grid: `grid_points` times on [0, grid_max]; grid_max <= 0 means horizon.
    int grid_points = 20;
    double grid_max = 0.0;

    /// Throws ConfigError for out-of-range values.
    void validate() const;
    SwitchedModel build_model() const;
    std::vector<double> grid() const;
};

/// Throws ConfigError (with line number) on syntax errors, unknown sections or keys,
/// type mismatches, missing required keys and invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double value);

}  // namespace pdmp
