#pragma once

#include <cstdint>
#include <string_view>

namespace cii {

/// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derived seed for one experiment work unit: independent of execution
/// order across datasets, proportions, and repeats.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view dataset,
                                 double epsilon, int repeat) {
    std::uint64_t h = mix_seed(master);
    h = mix_seed(h ^ hash_string(dataset));
    std::uint64_t eps_bits;
    static_assert(sizeof eps_bits == sizeof epsilon);
    __builtin_memcpy(&eps_bits, &epsilon, sizeof eps_bits);
    h = mix_seed(h ^ eps_bits);
    return mix_seed(h ^ static_cast<std::uint64_t>(repeat));
}

}  // namespace cii
