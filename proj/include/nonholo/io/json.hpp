#pragma once

// JSON output with insertion-ordered keys and every floating-point number
// printed at 17 significant digits, so identical inputs give identical bytes.

#include <json.hpp>
#include <span>
#include <string>

namespace nonholo::io {

using Json = nlohmann::ordered_json;

std::string dump_json(const Json& value, int indent = 2);

// Non-finite values have no JSON spelling; they become null.
Json number(double v);
Json numbers(std::span<const double> v);

}  // namespace nonholo::io
