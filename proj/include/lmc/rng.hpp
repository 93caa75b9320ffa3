#pragma once

#include <cstdint>

namespace lmc {

// Counter-based seeding: every generator is a pure function of
// (master seed, stream id, batch index), so parallel or re-ordered
// sampling reproduces the same draws.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256ss {
  public:
    Xoshiro256ss() : Xoshiro256ss(0, 0, 0) {}

    Xoshiro256ss(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
        std::uint64_t h = mix64(master);
        h = mix64(h ^ mix64(stream * 0xd1342543de82ef95ULL + 1));
        h = mix64(h ^ mix64(counter * 0x2545f4914f6cdd1dULL + 1));
        for (auto& w : state_) {
            h = mix64(h);
            w = h;
        }
        // all-zero state is invalid for xoshiro
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform double in [0,1), 53 mantissa bits, platform independent
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        // rejection-free modulo is fine here; bounds are tiny
        return next() % bound;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

}  // namespace lmc
