#include "brex/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace brex {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name, const std::string& ctx) {
  if (!j.is_object() || !j.contains(name))
    throw InputError(ctx + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw InputError(ctx + ": field '" + name + "': " + e.what());
  }
}

void check_format(const json& j, const std::string& expected) {
  const auto format = field<std::string>(j, "format", expected);
  if (format != expected)
    throw InputError("expected format '" + expected + "', found '" + format + "'");
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view bytes, std::size_t pos, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json world_to_json(const GridWorld& world) {
  json j;
  j["format"] = "brex-world/1";
  j["kind"] = world.is_grid() ? "grid" : "custom";
  j["width"] = world.width();
  j["height"] = world.height();
  j["gamma"] = world.gamma();
  j["num_features"] = world.num_features();
  json rows = json::array();
  for (int s = 0; s < world.num_states(); ++s) {
    const auto phi = world.features(s);
    rows.push_back(std::vector<double>(phi.begin(), phi.end()));
  }
  j["features"] = std::move(rows);
  if (!world.is_grid()) {
    j["num_actions"] = world.num_actions();
    j["transitions"] = world.transitions();
  }
  return j;
}

std::uint64_t world_hash(const GridWorld& world) { return fnv1a64(world_to_json(world).dump()); }

json world_file_to_json(const WorldFile& file) {
  json j = world_to_json(file.world);
  j["seed"] = file.seed;
  j["world_hash"] = hex64(world_hash(file.world));
  if (file.true_reward) j["true_reward"] = file.true_reward->w;
  return j;
}

WorldFile world_file_from_json(const json& j) {
  const std::string ctx = "world";
  check_format(j, "brex-world/1");
  const auto kind = field<std::string>(j, "kind", ctx);
  const auto width = field<int>(j, "width", ctx);
  const auto height = field<int>(j, "height", ctx);
  const auto gamma = field<double>(j, "gamma", ctx);
  const auto k = field<int>(j, "num_features", ctx);
  const auto rows = field<std::vector<std::vector<double>>>(j, "features", ctx);
  std::vector<double> values;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (static_cast<int>(rows[s].size()) != k)
      throw InputError(ctx + ": features[" + std::to_string(s) + "] has " +
                       std::to_string(rows[s].size()) + " entries, expected " + std::to_string(k));
    values.insert(values.end(), rows[s].begin(), rows[s].end());
  }
  try {
    FeatureTable table(static_cast<int>(rows.size()), k, std::move(values));
    WorldFile out{kind == "grid" ? GridWorld::grid(width, height, std::move(table), gamma)
                                 : GridWorld::custom(field<int>(j, "num_actions", ctx),
                                                     field<std::vector<int>>(j, "transitions", ctx),
                                                     std::move(table), gamma),
                  std::nullopt, 0};
    if (j.contains("seed")) out.seed = field<std::uint64_t>(j, "seed", ctx);
    if (j.contains("true_reward")) {
      RewardWeights w{field<std::vector<double>>(j, "true_reward", ctx), NormTag::L1};
      if (w.dim() != k) throw InputError(ctx + ": true_reward length does not match num_features");
      if (!w.satisfies_norm()) w.norm = NormTag::Unconstrained;
      out.true_reward = std::move(w);
    }
    return out;
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError(ctx + ": " + e.what());
  }
}

json dataset_to_json(const PreferenceDataset& data) {
  json j;
  j["format"] = "brex-dataset/1";
  json trajs = json::array();
  for (const auto& t : data.trajectories) trajs.push_back({{"states", t.states}, {"actions", t.actions}});
  j["trajectories"] = std::move(trajs);
  j["feature_sums"] = data.feature_sums;
  json prefs = json::array();
  for (const auto& p : data.prefs) prefs.push_back({p.worse, p.better});
  j["prefs"] = std::move(prefs);
  j["ranking_source"] = to_string(data.ranking_source);
  j["provenance"] = {{"seed", data.provenance.seed}, {"world_hash", hex64(data.provenance.world_hash)}};
  return j;
}

PreferenceDataset dataset_from_json(const json& j) {
  const std::string ctx = "dataset";
  check_format(j, "brex-dataset/1");
  PreferenceDataset data;
  const json trajs = field<json>(j, "trajectories", ctx);
  if (!trajs.is_array()) throw InputError(ctx + ": 'trajectories' must be an array");
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const std::string tctx = ctx + ": trajectories[" + std::to_string(i) + "]";
    data.trajectories.push_back({field<std::vector<int>>(trajs[i], "states", tctx),
                                 field<std::vector<int>>(trajs[i], "actions", tctx)});
  }
  data.feature_sums = field<std::vector<std::vector<double>>>(j, "feature_sums", ctx);
  const auto prefs = field<std::vector<std::vector<int>>>(j, "prefs", ctx);
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    if (prefs[i].size() != 2) throw InputError(ctx + ": prefs[" + std::to_string(i) + "] must be a pair");
    data.prefs.push_back({prefs[i][0], prefs[i][1]});
  }
  try {
    data.ranking_source = ranking_source_from_string(field<std::string>(j, "ranking_source", ctx));
    if (j.contains("provenance")) {
      const json& p = j["provenance"];
      data.provenance.seed = field<std::uint64_t>(p, "seed", ctx + ": provenance");
      data.provenance.world_hash =
          std::stoull(field<std::string>(p, "world_hash", ctx + ": provenance"), nullptr, 16);
    }
    data.validate();
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError(ctx + ": " + e.what());
  }
  return data;
}

json encoder_to_json(const Encoder& enc) {
  json j;
  j["format"] = "brex-encoder/1";
  j["input_dim"] = enc.input_dim;
  j["slope"] = enc.slope;
  json layers = json::array();
  for (const auto& layer : enc.layers) {
    const auto* p = enc.params.data() + layer.offset;
    const auto nw = static_cast<std::size_t>(layer.in) * layer.out;
    layers.push_back({{"in", layer.in},
                      {"out", layer.out},
                      {"weights", std::vector<double>(p, p + nw)},
                      {"bias", std::vector<double>(p + nw, p + nw + layer.out)}});
  }
  j["layers"] = std::move(layers);
  return j;
}

Encoder encoder_from_json(const json& j) {
  const std::string ctx = "encoder";
  check_format(j, "brex-encoder/1");
  Encoder enc;
  enc.input_dim = field<int>(j, "input_dim", ctx);
  enc.slope = field<double>(j, "slope", ctx);
  const json layers = field<json>(j, "layers", ctx);
  int expected_in = enc.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string lctx = ctx + ": layers[" + std::to_string(l) + "]";
    Dense d{field<int>(layers[l], "in", lctx), field<int>(layers[l], "out", lctx), true, enc.params.size()};
    const auto w = field<std::vector<double>>(layers[l], "weights", lctx);
    const auto b = field<std::vector<double>>(layers[l], "bias", lctx);
    if (d.in != expected_in) throw InputError(lctx + ": input width does not chain");
    if (w.size() != static_cast<std::size_t>(d.in) * d.out || b.size() != static_cast<std::size_t>(d.out))
      throw InputError(lctx + ": parameter array sizes do not match the layer shape");
    enc.params.insert(enc.params.end(), w.begin(), w.end());
    enc.params.insert(enc.params.end(), b.begin(), b.end());
    enc.layers.push_back(d);
    expected_in = d.out;
  }
  if (enc.layers.empty()) throw InputError(ctx + ": no layers");
  return enc;
}

json mcmc_config_to_json(const McmcConfig& cfg) {
  return {{"beta", cfg.beta},       {"step_sigma", cfg.step_sigma}, {"n_steps", cfg.n_steps},
          {"burn_in", cfg.burn_in}, {"thin", cfg.thin},             {"seed", cfg.seed}};
}

std::string encode_sample_file(std::string_view magic, const PosteriorChain& chain) {
  std::string out(magic);
  put_u32(out, static_cast<std::uint32_t>(chain.k));
  put_u64(out, chain.size());
  out.reserve(out.size() + chain.size() * (chain.k + 1) * 8);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (double x : chain.sample(i)) put_u64(out, std::bit_cast<std::uint64_t>(x));
    put_u64(out, std::bit_cast<std::uint64_t>(chain.log_post[i]));
  }
  return out;
}

PosteriorChain decode_sample_file(std::string_view bytes, std::string* magic_out) {
  constexpr std::size_t kMagicLen = 5;
  if (bytes.size() < kMagicLen + 12) throw InputError("sample file: truncated header");
  const std::string magic(bytes.substr(0, kMagicLen));
  if (magic != kMagicRex && magic != kMagicBirl && magic != kMagicEnsemble && magic != kMagicDropout)
    throw InputError("sample file: unknown magic '" + magic + "'");
  PosteriorChain chain;
  chain.k = static_cast<int>(get_le(bytes, kMagicLen, 4));
  const std::uint64_t count = get_le(bytes, kMagicLen + 4, 8);
  const std::size_t row_bytes = (static_cast<std::size_t>(chain.k) + 1) * 8;
  const std::size_t header = kMagicLen + 12;
  if (chain.k < 1 || (bytes.size() - header) != count * row_bytes)
    throw InputError("sample file: payload size does not match k=" + std::to_string(chain.k) +
                     " count=" + std::to_string(count));
  chain.samples.reserve(count * chain.k);
  chain.log_post.reserve(count);
  std::size_t pos = header;
  for (std::uint64_t i = 0; i < count; ++i) {
    for (int c = 0; c < chain.k; ++c, pos += 8)
      chain.samples.push_back(std::bit_cast<double>(get_le(bytes, pos, 8)));
    chain.log_post.push_back(std::bit_cast<double>(get_le(bytes, pos, 8)));
    pos += 8;
  }
  if (magic_out != nullptr) *magic_out = magic;
  return chain;
}

void write_sample_file(const std::string& path, std::string_view magic, const PosteriorChain& chain) {
  write_text_file(path, encode_sample_file(magic, chain));
}

PosteriorChain read_sample_file(const std::string& path, std::string* magic_out) {
  try {
    return decode_sample_file(read_text_file(path), magic_out);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string chain_to_csv(const PosteriorChain& chain) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "index";
  for (int c = 0; c < chain.k; ++c) os << ",w" << c;
  os << ",log_post\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    os << i;
    for (double x : chain.sample(i)) os << ',' << x;
    os << ',' << chain.log_post[i] << '\n';
  }
  return os.str();
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace brex
