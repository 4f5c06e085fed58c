#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace iolab {

using Rng = std::mt19937_64;

// 64-bit FNV-1a; used for stage names and config digests.
constexpr std::uint64_t fnv1a64(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based split: every (stage, index) pair gets an independent stream,
// so adding a later stage never perturbs the draws of an earlier one.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage,
                                    std::uint64_t index = 0) {
    return splitmix64(splitmix64(root ^ fnv1a64(stage)) + index);
}

inline Rng make_rng(std::uint64_t root, std::string_view stage, std::uint64_t index = 0) {
    return Rng(derive_seed(root, stage, index));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Index drawn from unnormalized non-negative weights.
std::size_t sample_index(Rng& rng, std::span<const double> weights);

// Symmetric or asymmetric Dirichlet draw.
std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> alpha);

// Precomputed cumulative table for repeated categorical draws.
class CategoricalSampler {
public:
    CategoricalSampler() = default;
    explicit CategoricalSampler(std::span<const double> weights);

    std::size_t operator()(Rng& rng) const;
    std::size_t size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
};

}  // namespace iolab
