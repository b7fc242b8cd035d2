#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace hpnet {

// All randomness in a run flows from one master seed; components derive their
// own stream with derive_seed(master, "tag") so adding a consumer never
// shifts another component's stream.

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t s = master ^ fnv1a64(tag);
    return splitmix64(s);
}

// Self-contained generator (splitmix64 core) so sampled values are identical
// across standard libraries; std distributions are not portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is < 2^-53 for the sizes used here
        return next_u64() % n;
    }

    // standard normal via Box-Muller (explicit two-draw form, no cached spare)
    double normal() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace hpnet
