#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace aniso {

// Validator for the JSON-Schema keywords used by the run-config schema:
// type, properties, required, additionalProperties, enum, const, minimum, maximum,
// exclusiveMinimum, exclusiveMaximum, items, minItems, maxItems, oneOf, $ref (local).
// Returns one message per violation, prefixed with a JSON pointer; empty means valid.
std::vector<std::string> schema_errors(const nlohmann::json& schema, const nlohmann::json& instance);

// Throws ValidationError listing every violation.
void validate_against(const nlohmann::json& schema, const nlohmann::json& instance);

} // namespace aniso
