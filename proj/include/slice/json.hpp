#pragma once

#include <json.hpp>

namespace slice {

// Emission uses the ordered variant so objects keep the fixed factor
// order (sub, env, act, det) in files and reports.
using Json = nlohmann::ordered_json;

}  // namespace slice
