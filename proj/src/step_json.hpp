#ifndef NESTOPT_STEP_JSON_HPP
#define NESTOPT_STEP_JSON_HPP

// Internal bridge between transformation steps and their JSON objects.
// dataset records embed step objects directly, so both translation units
// share these.

#include <json.hpp>

#include "nestopt/transforms.hpp"

namespace nestopt::detail {

nlohmann::ordered_json step_to_json_obj(const Transformation &t);
Transformation step_from_json_obj(const nlohmann::ordered_json &j);

}  // namespace nestopt::detail

#endif
