#include <gtest/gtest.h>

#include <sstream>

#include "moco/errors.hpp"
#include "moco/io.hpp"

using namespace moco;
using nlohmann::json;

TEST(Io, InstancesRoundTrip) {
  std::vector<ProblemInstance> insts;
  for (const auto kind : {ProblemKind::motsp, ProblemKind::mocvrp, ProblemKind::mokp}) {
    auto inst = sample_instance(kind, 7, 2, 3);
    inst.id = "x" + to_string(kind);
    insts.push_back(inst);
  }
  insts.push_back(sample_instance(ProblemKind::motsp, 5, 3, 4));
  std::stringstream ss;
  write_instances_jsonl(ss, insts);
  const auto back = read_instances_jsonl(ss);
  ASSERT_EQ(back.size(), insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i) {
    EXPECT_EQ(back[i].kind, insts[i].kind);
    EXPECT_EQ(back[i].coords, insts[i].coords);
    EXPECT_EQ(back[i].demands, insts[i].demands);
    EXPECT_EQ(back[i].capacity, insts[i].capacity);
    EXPECT_EQ(back[i].depot, insts[i].depot);
  }
  EXPECT_EQ(back[0].id, "xmotsp");
  EXPECT_EQ(back[3].id, "4");  // defaults to the line number
}

TEST(Io, ErrorsNameTheLine) {
  std::stringstream ss;
  ss << instance_to_json(sample_instance(ProblemKind::motsp, 5, 2, 1)).dump() << "\n\n{\"kind\":\"motsp\"}\n";
  try {
    read_instances_jsonl(ss);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream bad("not json\n");
  EXPECT_THROW(read_instances_jsonl(bad), ConfigError);
}

TEST(Io, RejectsBrokenInstances) {
  auto j = instance_to_json(sample_instance(ProblemKind::mocvrp, 6, 2, 1));
  j["demands"][0] = 2.0;
  EXPECT_THROW(instance_from_json(j), ConfigError);
  auto k = instance_to_json(sample_instance(ProblemKind::motsp, 6, 2, 1));
  k["coords"][2] = json::array({0.1, 0.2});
  EXPECT_THROW(instance_from_json(k), ConfigError);
  k = instance_to_json(sample_instance(ProblemKind::motsp, 6, 2, 1));
  k["kind"] = "qap";
  EXPECT_THROW(instance_from_json(k), ConfigError);
}

TEST(Io, SolutionRecord) {
  const auto inst = sample_instance(ProblemKind::mocvrp, 5, 2, 2);
  Solution s;
  s.kind = ProblemKind::mocvrp;
  s.routes = {{0, 1}, {2, 3, 4}};
  s.objectives = evaluate(inst, s);
  const auto j = solution_record("7", Preference({0.25, 0.75}), s);
  EXPECT_EQ(j.at("instance_id"), "7");
  EXPECT_EQ(j.at("lambda"), json::array({0.25, 0.75}));
  EXPECT_EQ(j.at("solution"), json::array({0, 1, 2, 0, 3, 4, 5, 0}));
  EXPECT_EQ(j.at("objectives").get<std::vector<double>>(), s.objectives);
}

TEST(Io, ParsePreference) {
  const auto p = parse_preference("0.3, 0.7", 2);
  EXPECT_DOUBLE_EQ(p[0], 0.3);
  EXPECT_NO_THROW(parse_preference("0.3333333,0.3333333,0.3333334", 3));
  EXPECT_THROW(parse_preference("0.3,0.6", 2), DomainError);
  EXPECT_THROW(parse_preference("-0.1,1.1", 2), DomainError);
  EXPECT_THROW(parse_preference("0.5,0.5", 3), DomainError);
  EXPECT_THROW(parse_preference("a,b", 2), DomainError);
  EXPECT_THROW(parse_preference("nan,1", 2), DomainError);
}
