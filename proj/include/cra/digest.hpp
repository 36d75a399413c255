#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace cra {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

/// FNV-1a 64-bit over a byte range; h chains across calls.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = kFnvOffset);

std::uint64_t fnv1a64(std::string_view text);

/// Digest of a file's bytes; throws std::runtime_error when unreadable.
std::uint64_t fnv1a64_file(const std::string& path);

/// 16-char lowercase hex.
std::string digest_hex(std::uint64_t h);

}  // namespace cra
