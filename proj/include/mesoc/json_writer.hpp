#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

namespace mesoc {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point number printed at 17 significant
/// digits, so doubles survive a text round trip bit for bit. Non-finite
/// numbers become null.
void write_json(std::ostream& out, const Json& value, int indent = 2);
std::string to_json_string(const Json& value, int indent = 2);

}  // namespace mesoc
