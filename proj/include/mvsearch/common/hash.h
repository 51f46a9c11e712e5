#ifndef MVSEARCH_COMMON_HASH_H_
#define MVSEARCH_COMMON_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace mvsearch {

// Lowercase hex SHA-256 digest.
std::string Sha256Hex(std::string_view data);

// First 8 bytes of the SHA-256 digest, big-endian.
std::uint64_t Hash64(std::string_view data);

// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt);

}  // namespace mvsearch

#endif  // MVSEARCH_COMMON_HASH_H_
