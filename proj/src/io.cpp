#include "moco/io.hpp"

#include <fstream>
#include <sstream>

#include "moco/errors.hpp"

namespace moco {

using nlohmann::json;

json instance_to_json(const ProblemInstance& inst) {
  json j = {{"kind", to_string(inst.kind)}, {"m", inst.m}, {"n", inst.n}, {"coords", inst.coords}, {"seed", inst.seed}};
  if (!inst.id.empty()) j["id"] = inst.id;
  if (inst.kind == ProblemKind::mocvrp) {
    j["depot"] = {inst.depot[0], inst.depot[1]};
    j["demands"] = inst.demands;
  }
  if (inst.kind != ProblemKind::motsp) j["capacity"] = inst.capacity;
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("instance must be a JSON object");
    ProblemInstance inst;
    inst.kind = parse_kind(j.at("kind").get<std::string>());
    inst.m = j.at("m");
    inst.n = j.at("n");
    inst.coords = j.at("coords").get<std::vector<std::vector<double>>>();
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.id = j.value("id", std::string());
    if (inst.kind == ProblemKind::mocvrp) {
      const auto d = j.at("depot").get<std::vector<double>>();
      if (d.size() != 2) throw ConfigError("depot must have 2 coordinates");
      inst.depot = {d[0], d[1]};
      inst.demands = j.at("demands").get<std::vector<double>>();
    }
    if (inst.kind != ProblemKind::motsp) inst.capacity = j.at("capacity");
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
}

std::vector<ProblemInstance> read_instances_jsonl(std::istream& is) {
  std::vector<ProblemInstance> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
      }
      auto inst = instance_from_json(j);
      if (inst.id.empty()) inst.id = std::to_string(number);
      out.push_back(std::move(inst));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ProblemInstance> read_instances_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open instance file " + path);
  try {
    return read_instances_jsonl(is);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_instances_jsonl(std::ostream& os, const std::vector<ProblemInstance>& instances) {
  for (const auto& inst : instances) os << instance_to_json(inst).dump() << '\n';
}

json solution_record(const std::string& instance_id, const Preference& preference, const Solution& solution) {
  return {{"instance_id", instance_id},
          {"lambda", preference.weights()},
          {"solution", solution.flat()},
          {"objectives", solution.objectives}};
}

Preference parse_preference(const std::string& csv, int m, double tolerance) {
  std::vector<double> w;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw DomainError("preference component '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw DomainError("preference component '" + item + "' is not a number");
    w.push_back(x);
  }
  const auto problem = preference_violation(w, m, tolerance);
  if (!problem.empty()) throw DomainError(problem);
  return Preference(std::move(w), tolerance);
}

}  // namespace moco
