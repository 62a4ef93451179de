#include "nonholo/io/json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nonholo::io {
namespace {

void newline(std::string& out, int indent, int depth) {
  if (indent < 0) return;
  out += '\n';
  out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void write(const Json& v, std::string& out, int indent, int depth) {
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(out, indent, depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(it.value(), out, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // arrays of plain numbers stay on one line
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number() || e.is_null(); });
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(out, indent, depth + 1);
        write(e, out, indent, depth + 1);
      }
      if (!flat) newline(out, indent, depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out += buf;
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  write(value, out, indent, 0);
  out += '\n';
  return out;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(std::span<const double> v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

}  // namespace nonholo::io
