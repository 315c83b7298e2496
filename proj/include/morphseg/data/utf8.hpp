#pragma once

#include <string>
#include <string_view>

namespace morphseg::data {

/// Decodes UTF-8; throws DataError on invalid input.
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);
std::string to_utf8(char32_t c);

}  // namespace morphseg::data
