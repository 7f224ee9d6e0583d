#include "mesoc/json_writer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mesoc {

namespace {

void newline(std::ostream& out, int indent, int depth) {
  if (indent < 0) return;
  out << '\n' << std::string(static_cast<std::size_t>(indent * depth), ' ');
}

void write_value(std::ostream& out, const Json& v, int indent, int depth) {
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ',';
        first = false;
        newline(out, indent, depth + 1);
        out << Json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        write_value(out, it.value(), indent, depth + 1);
      }
      newline(out, indent, depth);
      out << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Numeric arrays stay on one line; they are the bulk of the output.
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
      out << '[';
      bool first = true;
      for (const Json& e : v) {
        if (!first) out << (flat ? ", " : ",");
        first = false;
        if (!flat) newline(out, indent, depth + 1);
        write_value(out, e, indent, depth + 1);
      }
      if (!flat) newline(out, indent, depth);
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out << buf;
      return;
    }
    default:
      out << v.dump();
      return;
  }
}

}  // namespace

void write_json(std::ostream& out, const Json& value, int indent) {
  write_value(out, value, indent, 0);
  out << '\n';
}

std::string to_json_string(const Json& value, int indent) {
  std::ostringstream ss;
  write_json(ss, value, indent);
  return ss.str();
}

}  // namespace mesoc
