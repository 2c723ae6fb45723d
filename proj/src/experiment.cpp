#include "pdmp/experiment.hpp"

#include "pdmp/bounds.hpp"
#include "pdmp/coupling.hpp"
#include "pdmp/metrics.hpp"
#include "pdmp/simulator.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace pdmp {

namespace fs = std::filesystem;

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (!failed) {
                const std::size_t k = next++;
                if (k >= n) return;
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < length; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 15];
    }
    return out;
}

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        write_atomic(dir_ / name, content);
        entries_.push_back({name, sha256_hex(content), content.size()});
    }

    void write_manifest(const std::vector<std::string>& summary, bool pass) {
        nlohmann::ordered_json j;
        j["pass"] = pass;
        j["files"] = nlohmann::ordered_json::array();
        for (const auto& e : entries_) j["files"].push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
        j["summary"] = summary;
        write_atomic(dir_ / "manifest.json", j.dump(2) + "\n");
    }

    const std::vector<ManifestEntry>& entries() const { return entries_; }

private:
    static void write_atomic(const fs::path& path, const std::string& content) {
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
        }
        fs::rename(tmp, path);
    }

    fs::path dir_;
    std::vector<ManifestEntry> entries_;
};

std::string cells(const Vec& x) {
    std::string s;
    for (Eigen::Index k = 0; k < x.size(); ++k) s += "," + format_double(x(k));
    return s;
}

std::string coord_header(const std::string& prefix, int dim) {
    std::string s;
    for (int k = 0; k < dim; ++k) s += "," + prefix + std::to_string(k);
    return s;
}

struct Setup {
    SwitchedModel model;
    HybridState z0;
    HybridState z0_tilde;
    std::vector<double> grid;
    /// sample grid merged with the interior envelope grid times
    std::vector<double> sample_times;
};

Setup make_setup(const ExperimentConfig& config) {
    Setup s;
    s.model = config.build_model();
    const auto& m = s.model;
    const Vec e0 = Vec::Unit(m.dim, 0);
    s.z0.x = config.x0.size() > 0 ? config.x0 : Vec(m.region.center - m.region.radius * e0);
    s.z0_tilde.x = config.x0_tilde.size() > 0 ? config.x0_tilde : Vec(m.region.center + m.region.radius * e0);
    s.z0.mode = config.mode0;
    s.z0_tilde.mode = config.mode0_tilde;
    for (const auto* z : {&s.z0, &s.z0_tilde}) {
        if (z->x.size() != m.dim) throw ConfigError("initial point dimension does not match the model");
        if (z->mode >= m.modes()) throw ConfigError("initial mode out of range");
    }
    s.grid = config.grid();
    if (s.grid.back() > config.horizon * (1.0 + 1e-12)) throw ConfigError("grid t_max exceeds the horizon");
    s.sample_times = sample_grid(config.horizon, config.sample_dt);
    for (double t : s.grid)
        if (t > 0.0 && t < config.horizon) s.sample_times.push_back(t);
    std::sort(s.sample_times.begin(), s.sample_times.end());
    std::vector<double> merged;
    for (double t : s.sample_times) {
        if (!merged.empty() && std::abs(t - merged.back()) <= 1e-12 * std::max(1.0, t)) {
            // keep the envelope grid's exact value
            if (std::find(s.grid.begin(), s.grid.end(), t) != s.grid.end()) merged.back() = t;
            continue;
        }
        merged.push_back(t);
    }
    s.sample_times = std::move(merged);
    return s;
}

struct CoupleOutput {
    std::string csv;
    DistanceCurve curve;
};

CoupleOutput run_couple(const ExperimentConfig& config, const Setup& s, int workers) {
    const auto& m = s.model;
    const std::size_t n = config.replicas;
    const std::size_t g = s.grid.size();
    std::vector<std::string> rows(n);
    std::vector<double> gaps(n * g);
    std::vector<char> mismatch(n * g);
    parallel_for(n, workers, [&](std::size_t r) {
        Rng rng(derive_seed(config.master_seed, r));
        const CoupledPath path =
            m.constant_rates()
                ? couple_constant(m, s.z0, s.z0_tilde, config.horizon, s.sample_times, rng, config.record_jumps)
                : couple_state_dependent(m, s.z0, s.z0_tilde, config.horizon, s.sample_times, rng,
                                         config.record_jumps);
        std::string out;
        for (const auto& e : path.events) {
            out += format_double(e.t) + cells(e.state.x) + cells(e.state.x_tilde) + "," +
                   std::to_string(e.state.mode) + "," + std::to_string(e.state.mode_tilde) + "," +
                   to_string(e.state.phase) + "," + format_double(delta(e.state)) + "," + to_string(e.kind) + "," +
                   std::to_string(r) + "\n";
        }
        rows[r] = std::move(out);
        for (std::size_t k = 0; k < g; ++k) {
            const CoupledState& st = path.state_at(s.grid[k]);
            gaps[r * g + k] = (st.x - st.x_tilde).norm();
            mismatch[r * g + k] = st.mode != st.mode_tilde;
        }
    });
    CoupleOutput out;
    out.csv = "t" + coord_header("x", m.dim) + coord_header("x_tilde", m.dim) +
              ",mode,mode_tilde,phase,delta,event_kind,replica\n";
    for (auto& row : rows) out.csv += row;
    out.curve.estimator = config.estimator;
    std::vector<double> col_gap(n);
    std::vector<char> col_mis(n);
    for (std::size_t k = 0; k < g; ++k) {
        for (std::size_t r = 0; r < n; ++r) {
            col_gap[r] = gaps[r * g + k];
            col_mis[r] = mismatch[r * g + k];
        }
        const auto est = mixture_distance_from_samples(col_gap, col_mis, config.p, config.bootstrap,
                                                       derive_seed(config.master_seed ^ 0xB007ULL, k));
        out.curve.times.push_back(s.grid[k]);
        out.curve.estimates.push_back(est.estimate);
        out.curve.half_widths.push_back(est.half_width);
    }
    return out;
}

std::string distance_csv(const DistanceCurve& c) {
    std::string out = "t,estimate,ci_low,ci_high,estimator\n";
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        out += format_double(c.times[k]) + "," + format_double(c.estimates[k]) + "," +
               format_double(std::max(0.0, c.estimates[k] - c.half_widths[k])) + "," +
               format_double(c.estimates[k] + c.half_widths[k]) + "," + c.estimator + "\n";
    }
    return out;
}

/// sup over the grid and both initial points of the Monte Carlo E|X_t|^q.
double estimate_moment_bound(const ExperimentConfig& config, const Setup& s, int workers) {
    const std::size_t n = config.replicas;
    const std::size_t g = s.grid.size();
    std::vector<double> interior;
    for (double t : s.grid)
        if (t > 0.0 && t < config.horizon) interior.push_back(t);
    double best = 0.0;
    const std::uint64_t stream = derive_seed(config.master_seed, kMomentStream);
    for (int start = 0; start < 2; ++start) {
        const HybridState& z = start == 0 ? s.z0 : s.z0_tilde;
        std::vector<double> values(n * g);
        parallel_for(n, workers, [&](std::size_t r) {
            Rng rng(derive_seed(stream, start * n + r));
            const Trajectory traj = simulate(s.model, z, config.horizon, interior, rng, false);
            for (std::size_t k = 0; k < g; ++k)
                values[r * g + k] = std::pow(traj.nearest_sample(s.grid[k]).x.norm(), config.q);
        });
        for (std::size_t k = 0; k < g; ++k) {
            double sum = 0.0;
            for (std::size_t r = 0; r < n; ++r) sum += values[r * g + k];
            best = std::max(best, sum / n);
        }
    }
    return 1.1 * best;
}

BoundCurve compute_envelope(const ExperimentConfig& config, const Setup& s, int workers) {
    const auto& m = s.model;
    if (m.constant_rates()) {
        std::vector<double> c2_grid;
        const double t_max = std::max(s.grid.back(), 10.0);
        for (int k = 1; k <= 400; ++k) c2_grid.push_back(t_max * k / 400.0);
        const double ps[] = {config.p};
        const SpectralReport spectral = spectral_report(m.generator(), m.alpha_modes, ps, c2_grid);
        if (!(config.p < config.q) || !(config.q < spectral.kappa_moment))
            return constant_rate_envelope(spectral, config.p, config.q, 0.0, s.grid);  // throws
        const double moment = config.moment_bound >= 0.0 ? config.moment_bound : estimate_moment_bound(config, s, workers);
        return constant_rate_envelope(spectral, config.p, config.q, moment, s.grid);
    }
    const auto& rates = m.state_rates();
    if (!(m.alpha > 0.0)) throw InvalidAssumption("state-dependent envelope needs a uniform alpha > 0");
    return nonconstant_envelope(m.alpha, default_companion_rate(m), rates.lipschitz, m.region.radius, s.grid);
}

std::string bound_csv(const BoundCurve& c) {
    std::string out = "t,envelope\n";
    for (std::size_t k = 0; k < c.times.size(); ++k)
        out += format_double(c.times[k]) + "," + format_double(c.values[k]) + "\n";
    return out;
}

std::string constants_text(const BoundCurve& c) {
    std::string out = "kind = " + std::string(to_string(c.kind)) + "\n";
    for (const auto& [k, v] : c.constants) out += k + " = " + format_double(v) + "\n";
    return out;
}

std::string constants_line(const BoundCurve& c) {
    std::string out = std::string("envelope ") + to_string(c.kind) + ":";
    for (const auto& [k, v] : c.constants) out += " " + k + "=" + format_double(v);
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int workers) {
    config.validate();
    ArtifactWriter writer(config.output_dir);
    ExperimentResult result;
    auto& summary = result.summary;
    const std::string echoed = serialize_config(config);
    writer.write("config.cfg", echoed);
    summary.push_back(std::string("experiment ") + to_string(config.kind) + " model " + to_string(config.model) +
                      " replicas " + std::to_string(config.replicas) + " horizon " + format_double(config.horizon) +
                      " master_seed " + std::to_string(config.master_seed));

    const Setup s = make_setup(config);
    Rng audit_rng(derive_seed(config.master_seed, kAuditStream));
    const ModelAudit audit = audit_model(s.model, audit_rng);
    std::string audit_text;
    for (const auto& line : audit.lines) audit_text += line + "\n";
    if (config.kind == ExperimentKind::audit) {
        writer.write("audit.txt", audit_text);
        summary.insert(summary.end(), audit.lines.begin(), audit.lines.end());
        summary.push_back(std::string("audit ") + (audit.pass ? "PASS" : "FAIL"));
        result.pass = audit.pass;
    } else {
        if (!audit.pass) throw AuditFailure("model audit failed", audit.lines);
        summary.push_back("audit PASS");
        switch (config.kind) {
            case ExperimentKind::simulate: {
                const std::size_t n = config.replicas;
                std::vector<std::string> rows(n);
                std::vector<int> jumps(n);
                parallel_for(n, workers, [&](std::size_t r) {
                    Rng rng(derive_seed(config.master_seed, r));
                    const Trajectory traj =
                        simulate(s.model, s.z0, config.horizon, s.sample_times, rng, config.record_jumps);
                    std::string out;
                    for (const auto& e : traj.events)
                        out += format_double(e.t) + cells(e.x) + "," + std::to_string(e.mode) + "," +
                               to_string(e.kind) + "," + std::to_string(r) + "\n";
                    rows[r] = std::move(out);
                    jumps[r] = traj.jump_count();
                });
                std::string csv = "t" + coord_header("x", s.model.dim) + ",mode,event_kind,replica\n";
                for (auto& row : rows) csv += row;
                writer.write("trajectories.csv", csv);
                double mean_jumps = 0.0;
                for (int j : jumps) mean_jumps += j;
                summary.push_back("trajectories " + std::to_string(n) + " mean jumps " +
                                  format_double(mean_jumps / n));
                break;
            }
            case ExperimentKind::couple: {
                const auto out = run_couple(config, s, workers);
                writer.write("coupled.csv", out.csv);
                writer.write("distance.csv", distance_csv(out.curve));
                summary.push_back("coupled replicas " + std::to_string(config.replicas) + " distance at t_max " +
                                  format_double(out.curve.estimates.back()));
                break;
            }
            case ExperimentKind::bounds: {
                const BoundCurve env = compute_envelope(config, s, workers);
                writer.write("bound.csv", bound_csv(env));
                writer.write("bound_constants.txt", constants_text(env));
                summary.push_back(constants_line(env));
                break;
            }
            case ExperimentKind::full_check: {
                const auto out = run_couple(config, s, workers);
                const BoundCurve env = compute_envelope(config, s, workers);
                const EnvelopeCheck check = envelope_check(out.curve, env, config.slack);
                writer.write("coupled.csv", out.csv);
                writer.write("distance.csv", distance_csv(out.curve));
                writer.write("bound.csv", bound_csv(env));
                writer.write("bound_constants.txt", constants_text(env));
                std::string check_csv = "t,estimate,half_width,envelope,pass\n";
                for (std::size_t k = 0; k < env.times.size(); ++k)
                    check_csv += format_double(env.times[k]) + "," + format_double(out.curve.estimates[k]) + "," +
                                 format_double(out.curve.half_widths[k]) + "," + format_double(env.values[k]) + "," +
                                 (check.point_pass[k] ? "1" : "0") + "\n";
                writer.write("check.csv", check_csv);
                summary.push_back(constants_line(env));
                summary.push_back(std::string("envelope-check ") + to_string(env.kind) + " " +
                                  (check.pass ? "PASS" : "FAIL") + " slack=" + format_double(config.slack) +
                                  " worst_ratio=" + format_double(check.worst_ratio) +
                                  " at t=" + format_double(env.times[check.worst_index]));
                result.pass = check.pass;
                break;
            }
            case ExperimentKind::audit: break;
        }
    }
    std::string summary_text;
    for (const auto& line : summary) summary_text += line + "\n";
    writer.write("summary.txt", summary_text);
    writer.write_manifest(summary, result.pass);
    result.files = writer.entries();
    return result;
}

}  // namespace pdmp
