#pragma once

#include <string>
#include <string_view>

namespace segbound {

/// Decode UTF-8 into code points. Throws Error on malformed input.
std::u32string utf8_decode(std::string_view s);

/// Encode code points as UTF-8.
std::string utf8_encode(std::u32string_view s);

/// Whitespace for word splitting: ASCII space, \t, \n, \r, \v, \f.
bool is_space(char32_t c);

/// Strip leading/trailing whitespace.
std::u32string_view trim(std::u32string_view s);
std::string_view trim(std::string_view s);

} // namespace segbound
