#include "mesoc/parse.hpp"

#include <charconv>
#include <string>

namespace mesoc {

std::string_view trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
  std::string_view t = trim(text);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("not a number: '" + std::string(trim(text)) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite number: '" + std::string(trim(text)) + "'");
  }
  return value;
}

RealVector parse_vector(std::string_view text) {
  const std::string_view body = trim(text);
  if (body.empty()) throw ParseError("empty vector");
  RealVector out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = body.find_first_of(",\n", start);
    out.push_back(parse_double(body.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace mesoc
