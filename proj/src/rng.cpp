#include "edgeprice/rng.hpp"

#include <cmath>
#include <numbers>

namespace edgeprice {

double RngStream::exponential(double mean) {
    // 1 - u lies in (0, 1], so the log is finite.
    return -mean * std::log(1.0 - uniform01());
}

double RngStream::normal() {
    if (spare_normal_) {
        double v = *spare_normal_;
        spare_normal_.reset();
        return v;
    }
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    // Rejection keeps the draw unbiased for any n.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::uint64_t SeedManager::derive_seed(std::string_view label, std::uint64_t id) const {
    std::uint64_t h = splitmix64(master_);
    h = splitmix64(h ^ static_cast<std::uint64_t>(label.size()));
    for (unsigned char c : label) {
        h = splitmix64(h ^ c);
    }
    return splitmix64(h ^ splitmix64(id));
}

}  // namespace edgeprice
