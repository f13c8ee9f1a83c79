#pragma once

#include <string>

#include <json.hpp>

#include "biharm/diagnostics.hpp"
#include "biharm/functionals.hpp"
#include "biharm/grid_ops.hpp"
#include "biharm/model.hpp"
#include "biharm/moser.hpp"
#include "biharm/rearrangement.hpp"
#include "biharm/solvers.hpp"

namespace biharm {

using json = nlohmann::json;

// sorted keys, two-space indent, doubles with 17 significant digits,
// non-finite doubles as the strings "inf", "-inf", "nan"
std::string canonical_json(const json& j);

// write to a temporary sibling and rename over the target
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// header "r,u", one node per row, 17 significant digits
std::string field_csv(const RadialField& u);
void save_field_csv(const std::string& path, const RadialField& u);
RadialField load_field_csv(const std::string& path, int dimension);
RadialField parse_field_csv(const std::string& text, int dimension);

json to_json(const FunctionalReport& r);
json to_json(const SolveReport& r, bool with_trace = true);
json to_json(const GapReport& r);
json to_json(const AdamsRatioReport& r);
json to_json(const GrowthClassification& c);
json to_json(const ConditionReport& c);
json to_json(const RearrangeChecks& c);
json to_json(const WitnessReport& w);

// doubles that may be non-finite
json number(double v);

}  // namespace biharm
