#pragma once

// xoshiro256** seeded through splitmix64. Every random decision in the
// library goes through this type so results do not depend on the standard
// library's distribution implementations.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>

namespace artlab {

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    // Uniform integer on [0, bound), bound > 0. Lemire's nearly-divisionless method.
    std::uint64_t below(std::uint64_t bound);
    // Standard normal via Box-Muller; the spare value is cached.
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Independent stream for a named purpose ("init", "shuffle", ...).
    // Adding a new label never changes the sequence of an existing one.
    static Rng stream(std::uint64_t master_seed, std::string_view label);

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a(std::string_view text);

}  // namespace artlab
