#pragma once

#include <span>
#include <string>
#include <string_view>

namespace sflab {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);

}  // namespace sflab
