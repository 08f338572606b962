// brex: command-line harness for world generation, demonstrations, feature
// pretraining, posterior sampling, evaluation, benchmarking and the gridworld
// ablation experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "brex/birl.hpp"
#include "brex/demos.hpp"
#include "brex/embed.hpp"
#include "brex/experiment.hpp"
#include "brex/hcpe.hpp"
#include "brex/io.hpp"
#include "brex/log.hpp"
#include "brex/mdp.hpp"
#include "brex/rex.hpp"
#include "brex/uq.hpp"

using nlohmann::json;
using namespace brex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

// Flat key=value file; keys are long option names without dashes. Values
// only fill options that were not given on the command line.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw InputError(where + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\"[]");
      const auto b = s.find_last_not_of(" \t\r\"[]");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw InputError(where + ": unknown key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw InputError(where + ": bad value for '" + key + "': " + e.what());
    }
  }
}

struct McmcFlags {
  McmcConfig cfg;
  void add(CLI::App* sub, const McmcConfig& defaults) {
    cfg = defaults;
    sub->add_option("--beta", cfg.beta, "Inverse temperature")->capture_default_str();
    sub->add_option("--sigma", cfg.step_sigma, "Proposal standard deviation")->capture_default_str();
    sub->add_option("--steps", cfg.n_steps, "Number of proposals")->capture_default_str();
    sub->add_option("--burn", cfg.burn_in, "Burn-in used for summaries")->capture_default_str();
    sub->add_option("--thin", cfg.thin, "Thinning used for summaries")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  }
};

json chain_sidecar(std::string_view magic, const PosteriorChain& chain, const McmcConfig& cfg) {
  json j;
  j["format"] = "brex-chain/1";
  j["magic"] = std::string(magic);
  j["k"] = chain.k;
  j["count"] = chain.size();
  j["seed"] = cfg.seed;
  j["config"] = mcmc_config_to_json(cfg);
  j["config_hash"] = hex64(fnv1a64(j["config"].dump()));
  j["proposals"] = chain.proposals;
  j["accepted"] = chain.accept_count;
  j["acceptance_rate"] = chain.acceptance_rate();
  return j;
}

void write_chain(const std::string& out, std::string_view magic, const PosteriorChain& chain,
                 json sidecar, const std::string& csv) {
  write_sample_file(out, magic, chain);
  sidecar["payload_hash"] = hex64(fnv1a64(encode_sample_file(magic, chain)));
  write_text_file(out + ".json", sidecar.dump(2) + "\n");
  if (!csv.empty()) write_text_file(csv, chain_to_csv(chain));
}

std::string dataset_digest(const PreferenceDataset& data) {
  return hex64(fnv1a64(dataset_to_json(data).dump()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian reward extrapolation, Bayesian IRL and high-confidence policy evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "warning";
  app.add_option("--log-level", log_level, "debug, info, warning or quiet")
      ->check(CLI::IsMember({"debug", "info", "warning", "quiet"}));

  std::map<CLI::App*, std::string> config_paths;
  std::map<CLI::App*, bool> show_config;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_paths[sub], "Flat key=value file; flags override it");
    sub->add_flag("--show-config", show_config[sub], "Print the effective settings and exit");
  };

  // gen-world
  auto* gen_world = app.add_subcommand("gen-world", "Random grid world and true reward");
  int gw_width = 6, gw_height = 6, gw_features = 4;
  double gw_gamma = 0.9;
  std::uint64_t gw_seed = 0;
  std::string gw_out = "world.json";
  gen_world->add_option("--width", gw_width)->capture_default_str();
  gen_world->add_option("--height", gw_height)->capture_default_str();
  gen_world->add_option("--features", gw_features)->capture_default_str();
  gen_world->add_option("--gamma", gw_gamma)->capture_default_str();
  gen_world->add_option("--seed", gw_seed)->capture_default_str();
  gen_world->add_option("--out", gw_out, "Output world JSON ('-' for stdout)")->capture_default_str();
  common(gen_world);

  // gen-demos
  auto* gen_demos = app.add_subcommand("gen-demos", "Demonstrations and preferences for a world");
  std::string gd_world, gd_mode = "ranked", gd_out = "demos.json";
  int gd_count = 10, gd_horizon = 20, gd_random = -1;
  std::uint64_t gd_seed = 0;
  std::optional<double> gd_beta;
  gen_demos->add_option("--world", gd_world, "World JSON")->required();
  gen_demos->add_option("--mode", gd_mode, "ranked, optimal or auto-ranked")
      ->check(CLI::IsMember({"ranked", "optimal", "auto-ranked"}))
      ->capture_default_str();
  gen_demos->add_option("--count", gd_count, "Number of demonstrations")->capture_default_str();
  gen_demos->add_option("--horizon", gd_horizon)->capture_default_str();
  gen_demos->add_option("--n-random", gd_random, "Random rollouts for auto-ranked (default: count)")
      ->capture_default_str();
  gen_demos->add_option("--demo-beta", gd_beta, "Boltzmann demonstrator (default: greedy)");
  gen_demos->add_option("--seed", gd_seed)->capture_default_str();
  gen_demos->add_option("--out", gd_out)->capture_default_str();
  common(gen_demos);

  // pretrain
  auto* pretrain_cmd = app.add_subcommand("pretrain", "Self-supervised state encoder");
  std::string pt_world, pt_demos, pt_out = "encoder.json", pt_log, pt_dataset_out;
  PretrainConfig pt;
  pretrain_cmd->add_option("--world", pt_world)->required();
  pretrain_cmd->add_option("--demos", pt_demos)->required();
  pretrain_cmd->add_option("--steps", pt.steps)->capture_default_str();
  pretrain_cmd->add_option("--hidden", pt.hidden_dim)->capture_default_str();
  pretrain_cmd->add_option("--latent", pt.latent_dim)->capture_default_str();
  pretrain_cmd->add_option("--lr", pt.learning_rate)->capture_default_str();
  pretrain_cmd->add_option("--weight-decay", pt.weight_decay)->capture_default_str();
  pretrain_cmd->add_option("--slope", pt.slope)->capture_default_str();
  pretrain_cmd->add_option("--forward-repeats", pt.forward_repeats)->capture_default_str();
  pretrain_cmd->add_option("--w-inverse", pt.weights.inverse)->capture_default_str();
  pretrain_cmd->add_option("--w-forward", pt.weights.forward)->capture_default_str();
  pretrain_cmd->add_option("--w-temporal", pt.weights.temporal)->capture_default_str();
  pretrain_cmd->add_option("--w-vae", pt.weights.vae)->capture_default_str();
  pretrain_cmd->add_option("--w-ranking", pt.weights.ranking)->capture_default_str();
  pretrain_cmd->add_option("--seed", pt.seed)->capture_default_str();
  pretrain_cmd->add_option("--out", pt_out, "Encoder JSON")->capture_default_str();
  pretrain_cmd->add_option("--log", pt_log, "Per-step loss CSV");
  pretrain_cmd->add_option("--dataset-out", pt_dataset_out,
                           "Dataset re-featurized with the learned latent features");
  common(pretrain_cmd);

  // mcmc-brex
  auto* mcmc_brex = app.add_subcommand("mcmc-brex", "Bayesian REX posterior from preferences");
  std::string mb_demos, mb_out = "brex_chain.bin", mb_csv;
  McmcFlags mb;
  mcmc_brex->add_option("--demos", mb_demos)->required();
  mb.add(mcmc_brex, McmcConfig::gridworld_defaults());
  mcmc_brex->add_option("--out", mb_out)->capture_default_str();
  mcmc_brex->add_option("--csv", mb_csv, "Also export the chain as CSV");
  common(mcmc_brex);

  // mcmc-birl
  auto* mcmc_birl = app.add_subcommand("mcmc-birl", "Bayesian IRL posterior from state-action pairs");
  std::string mi_world, mi_demos, mi_out = "birl_chain.bin", mi_csv;
  McmcFlags mi;
  mcmc_birl->add_option("--world", mi_world)->required();
  mcmc_birl->add_option("--demos", mi_demos)->required();
  mi.add(mcmc_birl, McmcConfig::gridworld_defaults());
  mcmc_birl->add_option("--out", mi_out)->capture_default_str();
  mcmc_birl->add_option("--csv", mi_csv, "Also export the chain as CSV");
  common(mcmc_birl);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Ensemble or dropout reward-uncertainty baseline");
  std::string bl_demos, bl_method = "ensemble", bl_out = "baseline_chain.bin";
  EnsembleConfig bl_ens;
  double bl_p = 0.5;
  int bl_masks = 50;
  std::uint64_t bl_seed = 0;
  baseline->add_option("--demos", bl_demos)->required();
  baseline->add_option("--method", bl_method)
      ->check(CLI::IsMember({"ensemble", "dropout"}))
      ->capture_default_str();
  baseline->add_option("--members", bl_ens.n_members)->capture_default_str();
  baseline->add_option("--subsample", bl_ens.subsample_fraction)->capture_default_str();
  baseline->add_option("--epochs", bl_ens.train.epochs)->capture_default_str();
  baseline->add_option("--lr", bl_ens.train.learning_rate)->capture_default_str();
  baseline->add_option("--dropout", bl_p)->capture_default_str();
  baseline->add_option("--masks", bl_masks)->capture_default_str();
  baseline->add_option("--seed", bl_seed)->capture_default_str();
  baseline->add_option("--out", bl_out)->capture_default_str();
  common(baseline);

  // eval
  auto* eval = app.add_subcommand("eval", "Posterior mean and delta-VaR of evaluation policies");
  std::string ev_chain, ev_policies, ev_demos, ev_world, ev_csv, ev_json;
  double ev_delta = 0.05;
  int ev_burn = -1, ev_thin = -1;
  eval->add_option("--chain", ev_chain, "Chain binary")->required();
  eval->add_option("--policies", ev_policies, "JSON {\"policies\":[{\"name\",\"phi\",...}]}");
  eval->add_option("--demos", ev_demos, "Evaluate every trajectory of this dataset");
  eval->add_option("--world", ev_world, "World with true reward, for true returns");
  eval->add_option("--delta", ev_delta)->capture_default_str();
  eval->add_option("--burn", ev_burn, "Burn-in (default: from the chain sidecar)")->capture_default_str();
  eval->add_option("--thin", ev_thin, "Thinning (default: from the chain sidecar)")->capture_default_str();
  eval->add_option("--csv", ev_csv, "Report CSV ('-' for stdout)");
  eval->add_option("--json", ev_json, "Report JSON");
  common(eval);

  // bench
  auto* bench = app.add_subcommand("bench", "Sampler throughput on a synthetic preference set");
  BenchConfig bc;
  std::string bc_out = "-";
  bench->add_option("--trajectories", bc.n_trajectories)->capture_default_str();
  bench->add_option("--k", bc.k)->capture_default_str();
  bench->add_option("--proposals", bc.n_proposals)->capture_default_str();
  bench->add_option("--beta", bc.beta)->capture_default_str();
  bench->add_option("--sigma", bc.step_sigma)->capture_default_str();
  bench->add_option("--birl-proposals", bc.birl_proposals,
                    "Also compare per-proposal cost against Bayesian IRL on a 6x6 world")
      ->capture_default_str();
  bench->add_option("--seed", bc.seed)->capture_default_str();
  bench->add_option("--out", bc_out)->capture_default_str();
  common(bench);

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Gridworld ablation (c1, c2 or c3)");
  ExperimentConfig ec;
  std::string ec_name = "c1", ec_out = "-";
  experiment->add_option("--ablation", ec_name)
      ->check(CLI::IsMember({"c1", "c2", "c3"}))
      ->capture_default_str();
  experiment->add_option("--worlds", ec.n_worlds)->capture_default_str();
  experiment->add_option("--demo-counts", ec.demo_counts)->delimiter(',')->capture_default_str();
  experiment->add_option("--workers", ec.workers)->capture_default_str();
  experiment->add_option("--horizon", ec.horizon)->capture_default_str();
  experiment->add_option("--beta", ec.mcmc.beta)->capture_default_str();
  experiment->add_option("--sigma", ec.mcmc.step_sigma)->capture_default_str();
  experiment->add_option("--steps", ec.mcmc.n_steps)->capture_default_str();
  experiment->add_option("--burn", ec.mcmc.burn_in)->capture_default_str();
  experiment->add_option("--thin", ec.mcmc.thin)->capture_default_str();
  experiment->add_option("--seed", ec.seed)->capture_default_str();
  experiment->add_option("--out", ec_out)->capture_default_str();
  common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    set_log_level(log_level == "debug"  ? LogLevel::Debug
                  : log_level == "info" ? LogLevel::Info
                  : log_level == "quiet" ? LogLevel::Quiet
                                          : LogLevel::Warning);
    CLI::App* sub = app.get_subcommands().front();
    if (!config_paths[sub].empty()) apply_config_file(sub, config_paths[sub]);
    if (show_config[sub]) {
      std::cout << sub->config_to_str(true, true);
      return kExitOk;
    }

    if (sub == gen_world) {
      Rng rng = derive_rng(gw_seed, {0});
      WorldFile file{random_grid_world(gw_width, gw_height, gw_features, gw_gamma, rng),
                     std::nullopt, gw_seed};
      file.true_reward = sample_ground_truth_reward(gw_features, rng);
      emit(gw_out, world_file_to_json(file).dump(2) + "\n");
    } else if (sub == gen_demos) {
      const WorldFile wf = world_file_from_json(read_json_file(gd_world));
      if (!wf.true_reward) throw InputError(gd_world + ": no true_reward; cannot rank demonstrations");
      Rng rng = derive_rng(gd_seed, {1});
      PreferenceDataset data;
      DemonstratorOptions opts{gd_beta};
      if (gd_mode == "ranked") {
        data = generate_ranked_random_demos(wf.world, *wf.true_reward, gd_count, gd_horizon, rng);
      } else {
        std::vector<int> starts(static_cast<std::size_t>(gd_count));
        for (int& s : starts) s = uniform_int(rng, 0, wf.world.num_states() - 1);
        data = generate_optimal_demos(wf.world, *wf.true_reward, gd_horizon, starts, rng, opts);
        if (gd_mode == "auto-ranked")
          data = auto_rank_vs_random(data, wf.world, gd_random < 0 ? gd_count : gd_random,
                                     gd_horizon, rng);
      }
      data.provenance = {gd_seed, world_hash(wf.world)};
      json j = dataset_to_json(data);
      j["config"] = {{"mode", gd_mode}, {"count", gd_count}, {"horizon", gd_horizon},
                     {"n_random", gd_random}, {"seed", gd_seed}};
      if (gd_beta) j["config"]["demo_beta"] = *gd_beta;
      emit(gd_out, j.dump(2) + "\n");
    } else if (sub == pretrain_cmd) {
      const WorldFile wf = world_file_from_json(read_json_file(pt_world));
      PreferenceDataset data = dataset_from_json(read_json_file(pt_demos));
      const FeatureTable states = state_vector_table(wf.world);
      Rng rng = derive_rng(pt.seed, {2});
      const PretrainResult res = pretrain(data, states, wf.world.num_actions(), pt, rng);
      json j = encoder_to_json(res.encoder);
      j["config"] = {{"steps", pt.steps},         {"hidden", pt.hidden_dim},
                     {"latent", pt.latent_dim},   {"lr", pt.learning_rate},
                     {"weight_decay", pt.weight_decay}, {"slope", pt.slope},
                     {"forward_repeats", pt.forward_repeats}, {"seed", pt.seed},
                     {"weights", {pt.weights.inverse, pt.weights.forward, pt.weights.temporal,
                                  pt.weights.vae, pt.weights.ranking}}};
      j["skipped_forward"] = res.skipped_forward;
      j["skipped_temporal"] = res.skipped_temporal;
      emit(pt_out, j.dump(2) + "\n");
      if (!pt_log.empty()) write_text_file(pt_log, res.log_csv());
      if (!pt_dataset_out.empty()) {
        recompute_feature_sums(data, latent_feature_table(res.encoder, states));
        write_text_file(pt_dataset_out, dataset_to_json(data).dump(2) + "\n");
      }
    } else if (sub == mcmc_brex) {
      const PreferenceDataset data = dataset_from_json(read_json_file(mb_demos));
      if (data.prefs.empty())
        throw InputError(mb_demos + ": dataset has no preferences; Bayesian REX needs rankings");
      Rng rng = derive_rng(mb.cfg.seed, {3});
      const PosteriorChain chain = run_mcmc(data, mb.cfg, rng);
      json side = chain_sidecar(kMagicRex, chain, mb.cfg);
      side["dataset"] = mb_demos;
      side["dataset_hash"] = dataset_digest(data);
      side["prior_active"] = data.lowest_ranked().has_value();
      write_chain(mb_out, kMagicRex, chain, side, mb_csv);
      std::cerr << "mcmc-brex: " << chain.size() << " states, acceptance "
                << chain.acceptance_rate() << "\n";
    } else if (sub == mcmc_birl) {
      const WorldFile wf = world_file_from_json(read_json_file(mi_world));
      const PreferenceDataset data = dataset_from_json(read_json_file(mi_demos));
      const auto pairs = dedup_state_actions(data.trajectories);
      for (const auto& [s, a] : pairs)
        if (s < 0 || s >= wf.world.num_states() || a < 0 || a >= wf.world.num_actions())
          throw InputError(mi_demos + ": state-action pair out of range for " + mi_world);
      Rng rng = derive_rng(mi.cfg.seed, {4});
      const BirlResult res = run_mcmc_birl(wf.world, pairs, mi.cfg, rng);
      json side = chain_sidecar(kMagicBirl, res.chain, mi.cfg);
      side["dataset"] = mi_demos;
      side["dataset_hash"] = dataset_digest(data);
      side["world_hash"] = hex64(world_hash(wf.world));
      side["state_action_pairs"] = pairs.size();
      side["value_iteration_calls"] = res.value_iteration_calls;
      write_chain(mi_out, kMagicBirl, res.chain, side, mi_csv);
      std::cerr << "mcmc-birl: " << res.chain.size() << " states, acceptance "
                << res.chain.acceptance_rate() << "\n";
    } else if (sub == baseline) {
      const PreferenceDataset data = dataset_from_json(read_json_file(bl_demos));
      if (data.prefs.empty()) throw InputError(bl_demos + ": dataset has no preferences");
      Rng rng = derive_rng(bl_seed, {5});
      json side;
      side["format"] = "brex-chain/1";
      side["seed"] = bl_seed;
      side["dataset"] = bl_demos;
      side["dataset_hash"] = dataset_digest(data);
      if (bl_method == "ensemble") {
        const PosteriorChain chain = heads_as_chain(train_ensemble(data, bl_ens, rng));
        side["magic"] = std::string(kMagicEnsemble);
        side["config"] = {{"members", bl_ens.n_members}, {"subsample", bl_ens.subsample_fraction},
                          {"epochs", bl_ens.train.epochs}, {"lr", bl_ens.train.learning_rate}};
        side["config_hash"] = hex64(fnv1a64(side["config"].dump()));
        write_chain(bl_out, kMagicEnsemble, chain, side, "");
      } else {
        const LinearHead head = train_dropout_head(data, bl_p, bl_ens.train, rng);
        const PosteriorChain chain = dropout_chain(head, bl_masks, bl_p, rng);
        side["magic"] = std::string(kMagicDropout);
        side["config"] = {{"dropout", bl_p}, {"masks", bl_masks}, {"epochs", bl_ens.train.epochs},
                          {"lr", bl_ens.train.learning_rate}};
        side["config_hash"] = hex64(fnv1a64(side["config"].dump()));
        write_chain(bl_out, kMagicDropout, chain, side, "");
      }
    } else if (sub == eval) {
      std::string magic;
      PosteriorChain chain = read_sample_file(ev_chain, &magic);
      int burn = ev_burn, thin = ev_thin;
      if (burn < 0 || thin < 0) {
        json side;
        std::ifstream probe(ev_chain + ".json");
        if (probe) side = read_json_file(ev_chain + ".json");
        const bool sampled = magic == kMagicRex || magic == kMagicBirl;
        if (burn < 0)
          burn = sampled && side.contains("config") ? side["config"].value("burn_in", 0) : 0;
        if (thin < 0) thin = sampled && side.contains("config") ? side["config"].value("thin", 1) : 1;
      }
      const PosteriorChain kept = chain.retained(burn, thin);
      if (kept.size() == 0) throw InputError(ev_chain + ": no samples left after burn-in/thinning");

      std::vector<EvalPolicy> policies;
      if (!ev_policies.empty()) {
        const json pj = read_json_file(ev_policies);
        if (!pj.contains("policies") || !pj["policies"].is_array())
          throw InputError(ev_policies + ": expected an array field 'policies'");
        for (std::size_t i = 0; i < pj["policies"].size(); ++i) {
          const json& p = pj["policies"][i];
          const std::string where = ev_policies + ": policies[" + std::to_string(i) + "]";
          if (!p.contains("name") || !p.contains("phi"))
            throw InputError(where + ": needs 'name' and 'phi'");
          EvalPolicy pol;
          try {
            pol.name = p["name"].get<std::string>();
            pol.phi = p["phi"].get<std::vector<double>>();
            if (p.contains("true_return")) pol.true_return = p["true_return"].get<double>();
            pol.length = p.value("length", 0.0);
          } catch (const json::exception& e) {
            throw InputError(where + ": " + e.what());
          }
          policies.push_back(std::move(pol));
        }
      }
      if (!ev_demos.empty()) {
        const PreferenceDataset data = dataset_from_json(read_json_file(ev_demos));
        std::optional<WorldFile> wf;
        if (!ev_world.empty()) wf = world_file_from_json(read_json_file(ev_world));
        for (int i = 0; i < data.size(); ++i) {
          EvalPolicy pol{"traj" + std::to_string(i), data.feature_sums[i], std::nullopt,
                         static_cast<double>(data.trajectories[i].length())};
          if (wf && wf->true_reward) {
            const auto phi = trajectory_feature_sum(wf->world.feature_table(), data.trajectories[i]);
            pol.true_return = wf->true_reward->dot(phi);
          }
          policies.push_back(std::move(pol));
        }
      }
      if (policies.empty()) throw InputError("eval: give --policies and/or --demos");
      for (const auto& p : policies)
        if (static_cast<int>(p.phi.size()) != chain.k)
          throw InputError("eval: policy '" + p.name + "' has " + std::to_string(p.phi.size()) +
                           " features but the chain has k=" + std::to_string(chain.k));

      EvalReport report = evaluate_policies(kept, policies, ev_delta);
      report.provenance = "chain=" + ev_chain + " magic=" + magic + " burn=" +
                          std::to_string(burn) + " thin=" + std::to_string(thin) +
                          " samples=" + std::to_string(kept.size());
      if (!ev_json.empty()) emit(ev_json, report.to_json() + "\n");
      if (!ev_csv.empty() || ev_json.empty()) emit(ev_csv.empty() ? "-" : ev_csv, report.to_csv());
    } else if (sub == bench) {
      const BenchResult res = run_bench(bc);
      emit(bc_out, res.to_json() + "\n");
      std::cerr << "bench: " << res.n_proposals << " proposals, " << res.n_prefs
                << " preferences, k=" << res.k << " in " << res.seconds << " s ("
                << res.proposals_per_second << " proposals/s)\n";
    } else if (sub == experiment) {
      ec.ablation = ablation_from_string(ec_name);
      const ExperimentResult res = run_experiment(ec);
      emit(ec_out, res.to_csv());
    }
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
