#pragma once

#include <cstdint>
#include <random>

namespace cspat {

// Portable seeded generator. Bits come from std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the conversions below are spelled
// out so the same streams can be reproduced in any language:
//   uniform  = (bits >> 11) * 2^-53                         in [0, 1)
//   sign     = top bit of one draw (1 -> +1, 0 -> -1)
//   gaussian = Box-Muller on u1 = 1 - uniform, u2 = uniform:
//              sqrt(-2 ln u1) * cos(2 pi u2), then sqrt(-2 ln u1) * sin(2 pi u2)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }
    double uniform();
    double sign();
    double gaussian();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace cspat
