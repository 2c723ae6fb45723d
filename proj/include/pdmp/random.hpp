#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace pdmp {

/// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of replica `index` under `master`: the (index + 1)-th splitmix64 output
/// started from `master`. Depends only on (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Seeded generator with portable draws.
///
/// Only the engine comes from <random>; every derived variate (uniform, exponential,
/// categorical) is computed here so results are identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform on (0, 1): 53-bit grid, a zero draw is remapped to 2^-53.
    double uniform();

    /// Exp(1) by inversion of uniform(); always strictly positive and finite.
    double unit_exponential();

    /// Exp(rate); +inf when rate == 0.
    double exponential(double rate);

    /// Index k with probability weights[k] / total. `total` may exceed the weight sum:
    /// the remainder is a rejection outcome, returned as weights.size().
    std::size_t categorical(std::span<const double> weights, double total);

    /// Index k with probability weights[k] / sum(weights); never rejects.
    std::size_t choose(std::span<const double> weights);

    std::size_t uniform_index(std::size_t n);

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace pdmp
