#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace multistop {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seedable random stream. The engine is std::mt19937_64 (bit-exact by the
/// standard); the value-level samplers below are hand-rolled from raw bits so
/// results are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream derived from a master seed and an index. Used to
    /// give every rollout its own stream so parallel scheduling cannot
    /// change results.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(splitmix64(master_seed ^ splitmix64(index + 1)));
    }

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// +1 or -1 with equal probability.
    double rademacher() { return (bits() & 1u) ? 1.0 : -1.0; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Index sampled from an unnormalized non-negative weight vector.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) throw std::domain_error("categorical: no mass");
        double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace multistop
