#pragma once

#include <string_view>

#include "mesoc/vector.hpp"

namespace mesoc {

/// Parses one finite decimal (surrounding whitespace allowed).
/// Throws ParseError on anything else, including "nan" and "inf".
double parse_double(std::string_view text);

/// Comma-separated decimals; newlines are accepted as separators too.
RealVector parse_vector(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace mesoc
