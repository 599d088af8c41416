#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace edgeprice {

/// Random stream with portable samplers.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Samplers are written here (inverse CDF, Box-Muller) rather than
/// taken from <random> because the standard distributions are
/// implementation-defined and would break cross-platform reproducibility.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Exponential with the given mean, by inverse CDF.
    double exponential(double mean);

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

/// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives independent streams from one master seed.
///
/// A stream's seed is a pure function of (master seed, label, id); the label
/// length is mixed in so that label/id boundaries cannot alias.
class SeedManager {
public:
    explicit SeedManager(std::uint64_t master_seed) : master_(master_seed) {}

    std::uint64_t master_seed() const { return master_; }

    std::uint64_t derive_seed(std::string_view label, std::uint64_t id) const;

    RngStream derive_stream(std::string_view label, std::uint64_t id) const {
        return RngStream(derive_seed(label, id));
    }

private:
    std::uint64_t master_;
};

}  // namespace edgeprice
