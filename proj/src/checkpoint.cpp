#include "moco/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "moco/errors.hpp"

namespace moco {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'O', 'C', 'O', 'C', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_floats(std::string& out, const std::vector<tensor::Array<float>>& arrays) {
  for (const auto& a : arrays)
    for (float f : a.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(out, bits);
    }
}

void get_floats(const unsigned char*& p, std::vector<tensor::Array<float>>& arrays) {
  for (auto& a : arrays)
    for (float& f : a.data) {
      const std::uint32_t bits = get_u32(p);
      std::memcpy(&f, &bits, 4);
      p += 4;
    }
}

std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << x;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

json to_json(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},         {"layers", c.layers},
          {"heads", c.heads},                 {"ff_dim", c.ff_dim},
          {"hyper_hidden1", c.hyper_hidden1}, {"hyper_hidden2", c.hyper_hidden2},
          {"hyper_embed", c.hyper_embed},     {"logit_clip", c.logit_clip}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.ff_dim = j.at("ff_dim");
  c.hyper_hidden1 = j.at("hyper_hidden1");
  c.hyper_hidden2 = j.at("hyper_hidden2");
  c.hyper_embed = j.at("hyper_embed");
  c.logit_clip = j.at("logit_clip");
  c.validate();
  return c;
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  const auto& p = ckpt.policy;
  if (p.values.size() != p.layout.specs.size()) throw ContractViolation("policy values do not match its layout");
  std::string payload;
  payload.reserve(p.parameter_count() * 4 * (ckpt.optimizer ? 3 : 1));
  put_floats(payload, p.values);
  if (ckpt.optimizer) {
    put_floats(payload, ckpt.optimizer->m);
    put_floats(payload, ckpt.optimizer->v);
  }
  json params = json::array();
  for (const auto& s : p.layout.specs) params.push_back({{"name", s.name}, {"shape", s.shape}});
  json header = {
      {"version", kCheckpointVersion},
      {"kind", to_string(p.kind)},
      {"m", p.m},
      {"model", to_json(p.config)},
      {"scalarization",
       {{"method", to_string(ckpt.recipe.method)}, {"epsilon", ckpt.recipe.epsilon}, {"theta", ckpt.recipe.theta}}},
      {"seed", ckpt.seed},
      {"metadata", ckpt.metadata},
      {"params", params},
      {"payload_bytes", payload.size()},
      {"checksum", hex64(fnv1a64(payload.data(), payload.size()))},
      {"optimizer", ckpt.optimizer ? json{{"step", ckpt.optimizer->step}} : json(nullptr)},
  };
  const std::string h = header.dump();
  std::string prefix(kMagic, 8);
  put_u32(prefix, static_cast<std::uint32_t>(h.size()));
  os.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw std::runtime_error("failed writing checkpoint");
}

static Checkpoint parse_checkpoint(std::istream& is) {
  char magic[8];
  unsigned char len[4];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("not a checkpoint file");
  if (!is.read(reinterpret_cast<char*>(len), 4)) throw ConfigError("truncated checkpoint header");
  std::string h(get_u32(len), '\0');
  if (!is.read(h.data(), static_cast<std::streamsize>(h.size()))) throw ConfigError("truncated checkpoint header");
  const json header = json::parse(h);
  if (header.value("version", 0) != kCheckpointVersion)
    throw ConfigError("unsupported checkpoint version " + header.value("version", json(0)).dump());

  Checkpoint ckpt;
  const auto config = model_config_from_json(header.at("model"));
  ckpt.policy = Policy<float>::zeros(config, parse_kind(header.at("kind").get<std::string>()), header.at("m"));
  const auto& specs = ckpt.policy.layout.specs;
  const auto& params = header.at("params");
  if (params.size() != specs.size())
    throw ConfigError("checkpoint has " + std::to_string(params.size()) + " parameters, layout expects " +
                      std::to_string(specs.size()));
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (params[i].at("name") != specs[i].name || params[i].at("shape").get<tensor::Shape>() != specs[i].shape)
      throw ConfigError("checkpoint parameter " + std::to_string(i) + " (" + params[i].at("name").get<std::string>() +
                        ") does not match the layout");
  const auto& sc = header.at("scalarization");
  ckpt.recipe.method = parse_aggregation(sc.at("method").get<std::string>());
  ckpt.recipe.epsilon = sc.at("epsilon");
  ckpt.recipe.theta = sc.at("theta");
  ckpt.seed = header.at("seed");
  ckpt.metadata = header.at("metadata");

  const bool has_opt = !header.at("optimizer").is_null();
  const std::size_t count = ckpt.policy.parameter_count();
  const std::size_t bytes = count * 4 * (has_opt ? 3 : 1);
  if (header.at("payload_bytes").get<std::size_t>() != bytes) throw ConfigError("checkpoint payload size mismatch");
  std::string payload(bytes, '\0');
  if (!is.read(payload.data(), static_cast<std::streamsize>(bytes))) throw ConfigError("truncated checkpoint payload");
  if (hex64(fnv1a64(payload.data(), payload.size())) != header.at("checksum").get<std::string>())
    throw ConfigError("checkpoint checksum mismatch");
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  get_floats(p, ckpt.policy.values);
  if (has_opt) {
    AdamState s = AdamState::zeros_like(ckpt.policy.values);
    get_floats(p, s.m);
    get_floats(p, s.v);
    s.step = header.at("optimizer").at("step");
    ckpt.optimizer = std::move(s);
  }
  return ckpt;
}

Checkpoint read_checkpoint(std::istream& is) {
  try {
    return parse_checkpoint(is);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    write_checkpoint(os, ckpt);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path);
  return read_checkpoint(is);
}

}  // namespace moco
