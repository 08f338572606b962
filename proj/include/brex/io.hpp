#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "brex/demos.hpp"
#include "brex/embed.hpp"
#include "brex/mdp.hpp"
#include "brex/rex.hpp"

namespace brex {

/// Malformed or inconsistent input file. what() names the file and field.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::string_view kMagicRex = "BREX1";
inline constexpr std::string_view kMagicBirl = "BIRL1";
inline constexpr std::string_view kMagicEnsemble = "ENSB1";
inline constexpr std::string_view kMagicDropout = "DROP1";

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct WorldFile {
  GridWorld world;
  std::optional<RewardWeights> true_reward;
  std::uint64_t seed = 0;
};

nlohmann::json world_to_json(const GridWorld& world);
nlohmann::json world_file_to_json(const WorldFile& file);
WorldFile world_file_from_json(const nlohmann::json& j);
/// Hash of the world's structural content (dimensions, features, dynamics, gamma).
std::uint64_t world_hash(const GridWorld& world);

nlohmann::json dataset_to_json(const PreferenceDataset& data);
PreferenceDataset dataset_from_json(const nlohmann::json& j);

nlohmann::json encoder_to_json(const Encoder& enc);
Encoder encoder_from_json(const nlohmann::json& j);

nlohmann::json mcmc_config_to_json(const McmcConfig& cfg);

/// Binary sample file: magic, u32 k, u64 count, then per row k f64 and one f64
/// log posterior, all little-endian.
std::string encode_sample_file(std::string_view magic, const PosteriorChain& chain);
PosteriorChain decode_sample_file(std::string_view bytes, std::string* magic_out = nullptr);

void write_sample_file(const std::string& path, std::string_view magic, const PosteriorChain& chain);
PosteriorChain read_sample_file(const std::string& path, std::string* magic_out = nullptr);

std::string chain_to_csv(const PosteriorChain& chain);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace brex
