// Copyright 2026 The csmala Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CSMALA_RNG_HPP
#define CSMALA_RNG_HPP

#include <cmath>
#include <cstdint>

namespace csmala {

/// Splittable deterministic random stream (SplitMix64 core).
///
/// Every consumer of randomness (mask draws, proposal noise, accept
/// uniforms, data generation, ...) owns its own stream derived from
/// (master seed, chain index, substream tag), so independent chains and
/// algorithm variants can share randomness when their substream keys
/// coincide. Output is identical across platforms and runs.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw on (0,1); never returns 0 or 1 exactly.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached, so a single
    /// stream yields a reproducible scalar sequence.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// Stateless key mixing for substream derivation.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive the seed for (master, chain, substream-tag).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t chain,
                                 std::uint64_t tag) {
    return mix_seed(mix_seed(master, chain), tag);
}

// Substream tags used throughout the library.
namespace substream {
inline constexpr std::uint64_t kMask = 1;
inline constexpr std::uint64_t kProposal = 2;
inline constexpr std::uint64_t kAccept = 3;
inline constexpr std::uint64_t kData = 4;
inline constexpr std::uint64_t kInit = 5;
inline constexpr std::uint64_t kPretrain = 6;
}  // namespace substream

}  // namespace csmala

#endif  // CSMALA_RNG_HPP
