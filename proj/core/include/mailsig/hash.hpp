#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace mailsig {

std::array<std::uint8_t, 32> sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

/// Stable pseudonym for an address: first 16 hex chars of SHA-256(salt|value).
/// Same salt and address always map to the same id.
std::string salted_id(std::string_view salt, std::string_view value);

}  // namespace mailsig
