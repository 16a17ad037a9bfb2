#include "ergochron/seed.hpp"

#include <cmath>
#include <numbers>

namespace ergochron {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    const std::uint64_t key = mix64(master ^ 0x6a09e667f3bcc909ull);
    return mix64(key + 0x9e3779b97f4a7c15ull * (index + 1));
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - u keeps the logarithm argument in (0, 1].
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

}  // namespace ergochron
