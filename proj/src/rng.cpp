#include "adpp/rng.hpp"

namespace adpp {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    // Rejection sampling on the top bits keeps the result exactly uniform.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
}

}  // namespace adpp
