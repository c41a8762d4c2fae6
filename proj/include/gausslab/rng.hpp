#pragma once

#include <cstdint>
#include <random>

namespace gausslab {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Used to turn (seed, stream) pairs into
/// well-separated engine seeds.
std::uint64_t mix64(std::uint64_t value) noexcept;

/// Seed of sub-stream `stream` of `base`. Sample chunk c of a batch seeded
/// with s draws from Engine(derive_seed(s, c)); experiments derive their
/// independent batches with distinct stream tags.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Samples per independently seeded chunk.
inline constexpr std::size_t kSampleChunk = 4096;

}  // namespace gausslab
