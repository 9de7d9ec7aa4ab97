#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "ksrg/model.hpp"

namespace ksrg {

using Json = nlohmann::ordered_json;

// Model keys: d, tau, alpha, sigma, kernel, profile, beta, p, vertex_set.
// tau and alpha accept "inf". profile = "threshold" implies alpha = inf when
// alpha is absent and conflicts with a finite alpha.
Json model_to_json(const ModelParams& mp);
ModelParams model_from_json(const Json& j);

// reads a JSON object; throws ParamError naming the path
Json load_config_file(const std::string& path);

// later objects override earlier ones key by key
Json merge_config(const Json& base, const Json& over);

// JSON array, "a,b,c", or "start:stop:factor" (geometric, inclusive)
std::vector<double> parse_grid(const Json& v);
std::vector<double> parse_grid(const std::string& s);

ExtReal parse_ext(const Json& v, const char* key);

}  // namespace ksrg
