#include "pdmp/random.hpp"

#include <cmath>
#include <limits>

namespace pdmp {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master + index * 0x9E3779B97F4A7C15ULL;
    return splitmix64(state);
}

double Rng::uniform() {
    constexpr double kUnit = 0x1.0p-53;
    const double u = static_cast<double>(engine_() >> 11) * kUnit;
    return u == 0.0 ? kUnit : u;
}

double Rng::unit_exponential() { return -std::log(uniform()); }

double Rng::exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return unit_exponential() / rate;
}

std::size_t Rng::categorical(std::span<const double> weights, double total) {
    const double target = uniform() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        acc += weights[k];
        if (target < acc) return k;
    }
    return weights.size();
}

std::size_t Rng::choose(std::span<const double> weights) {
    double total = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        total += weights[k];
        if (weights[k] > 0.0) last = k;
    }
    const std::size_t k = categorical(weights, total);
    return k < weights.size() ? k : last;  // rounding at the top end
}

std::size_t Rng::uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

}  // namespace pdmp
