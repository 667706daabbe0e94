#pragma once

// Counter-based uniform generator ("eoc-rng v1") plus normal-distribution
// special functions used by the inverse-CDF samplers.
//
// Draw (seed, sample_index, slot) -> u in (0,1) through a SplitMix64 cascade:
// the value depends only on the three counters, never on generator state, so
// sample i is identical no matter how many samples are requested (prefix
// nesting) and runs are reproducible across platforms.

#include <cstdint>

namespace eoc {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Uniform draw in the open interval (0,1): top 53 bits, centered.
inline double counter_u01(std::uint64_t seed, std::uint64_t sample_index, std::uint64_t slot) {
    std::uint64_t v = splitmix64(seed ^ 0x6a09e667f3bcc909ull);
    v = splitmix64(v + sample_index * 0x9e3779b97f4a7c15ull);
    v = splitmix64(v + slot * 0xd1b54a32d192ed03ull);
    return (static_cast<double>(v >> 11) + 0.5) * (1.0 / 9007199254740992.0);  // 2^53
}

// Derives an unrelated stream seed, used for independent per-k redraws.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x2545f4914f6cdd1dull));
}

double normal_pdf(double z);
double normal_cdf(double z);
// Inverse standard normal CDF, |error| ~ 1e-15 after one Halley refinement.
double normal_quantile(double p);

}  // namespace eoc
