#pragma once

#include <cstdint>
#include <string_view>

namespace mbt::mck {

using Fingerprint = std::uint64_t;

/// FNV-1a over the bytes, then a splitmix64 finalizer for avalanche.
/// Stable across platforms and runs; used for DOT node ids and test names.
constexpr Fingerprint fingerprint64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

} // namespace mbt::mck
