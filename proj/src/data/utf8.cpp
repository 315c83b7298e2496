#include "morphseg/data/utf8.hpp"

#include <boost/locale/encoding_utf.hpp>

#include "morphseg/data/types.hpp"

namespace morphseg::data {

std::u32string to_u32(std::string_view utf8) {
  try {
    return boost::locale::conv::utf_to_utf<char32_t>(utf8.data(), utf8.data() + utf8.size(),
                                                     boost::locale::conv::stop);
  } catch (const boost::locale::conv::conversion_error&) {
    throw DataError("invalid UTF-8 sequence in '" + std::string(utf8) + "'");
  }
}

std::string to_utf8(std::u32string_view text) {
  return boost::locale::conv::utf_to_utf<char>(text.data(), text.data() + text.size());
}

std::string to_utf8(char32_t c) { return to_utf8(std::u32string_view(&c, 1)); }

}  // namespace morphseg::data
