#pragma once

#include "pdmp/config.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pdmp {

/// Model audit failed before any simulation; `lines` holds the diagnostics.
class AuditFailure : public Error {
public:
    AuditFailure(const std::string& what, std::vector<std::string> lines) : Error(what), lines_(std::move(lines)) {}
    const std::vector<std::string>& lines() const noexcept { return lines_; }

private:
    std::vector<std::string> lines_;
};

struct ManifestEntry {
    std::string file;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct ExperimentResult {
    std::vector<ManifestEntry> files;
    std::vector<std::string> summary;
    /// false when an envelope check or audit failed
    bool pass = true;
};

/// Runs the configured experiment and writes its artifacts into config.output_dir:
/// the echoed config, CSVs, summary.txt and finally manifest.json (write-then-rename).
///
/// Replica r draws from Rng(derive_seed(master_seed, r)); moment estimates use the
/// stream derive_seed(derive_seed(master_seed, kMomentStream), r). Results are merged
/// by replica index, so outputs do not depend on `workers`.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 1);

inline constexpr std::uint64_t kMomentStream = 0x4d6f6d656e74ULL;
inline constexpr std::uint64_t kAuditStream = 0x4175646974ULL;

/// Calls fn(k) for k in [0, n) on up to `workers` threads; rethrows the first exception.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::string sha256_hex(std::string_view data);

}  // namespace pdmp
