#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mdr {

/// Lowercase hex SHA-256 of a byte string / file contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Platform-stable 64-bit hash (FNV-1a followed by a splitmix64 finalizer).
/// Not cryptographic; used for feature hashing and tie-break jitter.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed = 0);

}  // namespace mdr
