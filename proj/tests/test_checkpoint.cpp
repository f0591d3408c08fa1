#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

#include "moco/checkpoint.hpp"
#include "moco/errors.hpp"

using namespace moco;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.embed_dim = 16;
  c.layers = 1;
  c.heads = 2;
  c.ff_dim = 32;
  c.hyper_hidden1 = 8;
  c.hyper_hidden2 = 8;
  c.hyper_embed = 4;
  return c;
}

Checkpoint sample(ProblemKind kind, bool with_optimizer) {
  Checkpoint c;
  c.policy = Policy<float>::initialized(tiny(), kind, 2, 42);
  c.recipe = ScalarizationRecipe{Aggregation::pbi, 0.5, 7.0};
  c.seed = 1234567890123ULL;
  c.metadata = {{"note", "unit"}, {"nested", {{"x", 1}}}};
  if (with_optimizer) {
    auto adam = AdamState::zeros_like(c.policy.values);
    adam.step = 17;
    for (std::size_t s = 0; s < adam.m.size(); ++s)
      for (std::size_t i = 0; i < adam.m[s].data.size(); ++i) {
        adam.m[s].data[i] = static_cast<float>(i) * 1e-3f - 0.5f;
        adam.v[s].data[i] = static_cast<float>(s) + 1e-7f;
      }
    c.optimizer = adam;
  }
  return c;
}

bool bit_equal(const std::vector<tensor::Array<float>>& a, const std::vector<tensor::Array<float>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t s = 0; s < a.size(); ++s)
    if (a[s].shape != b[s].shape ||
        std::memcmp(a[s].data.data(), b[s].data.data(), a[s].data.size() * sizeof(float)) != 0)
      return false;
  return true;
}

std::string serialize(const Checkpoint& c) {
  std::ostringstream os;
  write_checkpoint(os, c);
  return os.str();
}

Checkpoint parse(const std::string& bytes) {
  std::istringstream is(bytes);
  return read_checkpoint(is);
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  for (const auto kind : {ProblemKind::motsp, ProblemKind::mocvrp, ProblemKind::mokp})
    for (const bool opt : {false, true}) {
      const auto c = sample(kind, opt);
      const auto back = parse(serialize(c));
      EXPECT_EQ(back.policy.kind, kind);
      EXPECT_EQ(back.policy.m, 2);
      EXPECT_EQ(to_json(back.policy.config), to_json(c.policy.config));
      EXPECT_TRUE(bit_equal(back.policy.values, c.policy.values));
      EXPECT_EQ(back.recipe.method, Aggregation::pbi);
      EXPECT_EQ(back.recipe.theta, 7.0);
      EXPECT_EQ(back.seed, c.seed);
      EXPECT_EQ(back.metadata, c.metadata);
      ASSERT_EQ(back.optimizer.has_value(), opt);
      if (opt) {
        EXPECT_EQ(back.optimizer->step, 17);
        EXPECT_TRUE(bit_equal(back.optimizer->m, c.optimizer->m));
        EXPECT_TRUE(bit_equal(back.optimizer->v, c.optimizer->v));
      }
      EXPECT_EQ(serialize(back), serialize(c));
    }
}

TEST(Checkpoint, CorruptPayloadIsDetected) {
  auto bytes = serialize(sample(ProblemKind::motsp, false));
  bytes[bytes.size() - 3] ^= 0x10;
  EXPECT_THROW(parse(bytes), ConfigError);
}

TEST(Checkpoint, TruncationIsDetected) {
  const auto bytes = serialize(sample(ProblemKind::mokp, true));
  EXPECT_THROW(parse(bytes.substr(0, bytes.size() - 8)), ConfigError);
  EXPECT_THROW(parse(bytes.substr(0, 20)), ConfigError);
  EXPECT_THROW(parse("NOTACKPT"), ConfigError);
}

TEST(Checkpoint, LayoutMismatchIsRejected) {
  auto bytes = serialize(sample(ProblemKind::motsp, false));
  const auto at = bytes.find("encoder.input.weight");
  ASSERT_NE(at, std::string::npos);
  bytes.replace(at, 20, "encoder.input.wxight");
  EXPECT_THROW(parse(bytes), ConfigError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "moco_ckpt_test.ckpt").string();
  const auto c = sample(ProblemKind::mocvrp, true);
  save_checkpoint(path, c);
  const auto back = load_checkpoint(path);
  EXPECT_TRUE(bit_equal(back.policy.values, c.policy.values));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), ConfigError);
}

TEST(Checkpoint, Fnv1aKnownValues) {
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(fnv1a64("", 0), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a", 1), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar", 6), 0x85944171f73967e8ULL);
}
