#pragma once

// Internal helpers shared by the modules that read/write structured-text
// documents.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tscale/errors.hpp"
#include "tscale/shape.hpp"

namespace tscale::detail {

using Json = nlohmann::ordered_json;

Json parse_json(std::string_view text, std::string_view what);

// Rejects any key of `obj` not in `allowed`.
void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view what);

Json shape_value(const ShapeDocument& doc);
ShapeDocument shape_from_value(const Json& obj);

std::int64_t get_int(const Json& obj, std::string_view key, std::string_view what);
double get_double(const Json& obj, std::string_view key, std::string_view what);

}  // namespace tscale::detail
