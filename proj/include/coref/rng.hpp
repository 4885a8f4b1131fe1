#pragma once
#include <cstdint>
#include <vector>

namespace coref {

// splitmix64: tiny counter-based generator, one stream per seed.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0,1) with 53 bits of mantissa
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // unbiased integer in [0,n) via 128-bit multiply rejection
    uint64_t index(uint64_t n) {
        if (n == 0) return 0;
        __uint128_t m = __uint128_t(next_u64()) * n;
        uint64_t lo = uint64_t(m);
        if (lo < n) {
            uint64_t thresh = (0 - n) % n;
            while (lo < thresh) {
                m = __uint128_t(next_u64()) * n;
                lo = uint64_t(m);
            }
        }
        return uint64_t(m >> 64);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }
};

} // namespace coref
