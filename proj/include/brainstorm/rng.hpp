#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace brainstorm::rng {

// One splitmix64 step: advances the state and returns a mixed output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hash-chains a master seed with a path of stream identifiers, so distinct
// (seed, path) combinations key unrelated streams. Everything that needs
// parallel-safe reproducibility (per-agent, per-fold, per-trial, per-query
// randomness) derives its stream seed through here instead of sharing
// generator state.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = seed;
    std::uint64_t h = splitmix64(state);
    for (std::uint64_t id : path) {
        state = h ^ id;
        h = splitmix64(state);
    }
    return h;
}

// Deterministic counter-based generator. Identical seeds give identical
// sequences on every platform; no global state, no std::random_device.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on [0, 1) with 53 significant bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Uniform on [-1, 1].
    double next_symmetric() { return 2.0 * next_unit() - 1.0; }

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double next_gaussian() {
        const double u = 1.0 - next_unit();  // (0, 1]: keeps the log finite
        const double v = next_unit();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * pi() * v);
    }

    // Uniform index in [0, n); n must be positive.
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = next_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static constexpr double pi() { return 3.14159265358979323846; }
    std::uint64_t state_;
};

}  // namespace brainstorm::rng
