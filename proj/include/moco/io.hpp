#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "moco/problems.hpp"
#include "moco/scalarization.hpp"

namespace moco {

// One JSON object per line: {"kind","m","n","coords","depot","demands",
// "capacity","seed"} with fields irrelevant to the kind omitted; "id" is
// optional and defaults to "<line number>".
nlohmann::json instance_to_json(const ProblemInstance& instance);
// Throws ConfigError describing the first problem.
ProblemInstance instance_from_json(const nlohmann::json& j);

// Errors are reported as "line N: ...".
std::vector<ProblemInstance> read_instances_jsonl(std::istream& is);
std::vector<ProblemInstance> read_instances_file(const std::string& path);
void write_instances_jsonl(std::ostream& os, const std::vector<ProblemInstance>& instances);

// {"instance_id","lambda","solution","objectives"}; solution in flat form.
nlohmann::json solution_record(const std::string& instance_id, const Preference& preference,
                               const Solution& solution);

// Parses "0.3,0.7" into a validated preference of size m.
Preference parse_preference(const std::string& csv, int m, double tolerance = 1e-6);

}  // namespace moco
