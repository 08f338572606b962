#include "brex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "brex/birl.hpp"
#include "brex/demos.hpp"
#include "brex/io.hpp"
#include "brex/log.hpp"
#include "brex/mdp.hpp"

namespace brex {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_loss(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::vector<int> start_states(const PreferenceDataset& data) {
  std::vector<int> starts;
  for (const auto& t : data.trajectories) starts.push_back(t.states.front());
  return starts;
}

double loss_for(const GridWorld& world, const RewardWeights& truth, const PosteriorChain& chain,
                const McmcConfig& mcmc) {
  const ChainMean mean = chain_mean(chain, mcmc.burn_in, mcmc.thin);
  const QTable q = value_iteration(world, mean.weights.w);
  return policy_loss(world, greedy_policy(q), truth.w);
}

}  // namespace

const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::RankedVsOptimal: return "c1";
    case Ablation::OnlyRanked: return "c2";
    case Ablation::OnlyOptimal: return "c3";
  }
  return "?";
}

Ablation ablation_from_string(const std::string& name) {
  if (name == "c1") return Ablation::RankedVsOptimal;
  if (name == "c2") return Ablation::OnlyRanked;
  if (name == "c3") return Ablation::OnlyOptimal;
  throw std::invalid_argument("unknown ablation '" + name + "' (expected c1, c2 or c3)");
}

void ExperimentConfig::validate() const {
  if (n_worlds < 1) throw std::invalid_argument("n_worlds must be at least 1");
  if (demo_counts.empty()) throw std::invalid_argument("demo_counts is empty");
  for (int m : demo_counts)
    if (m < 1) throw std::invalid_argument("demo counts must be positive");
  if (width < 1 || height < 1 || num_features < 1)
    throw std::invalid_argument("world dimensions must be positive");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  mcmc.validate();
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "ablation=" << to_string(ablation) << ";n_worlds=" << n_worlds << ";demo_counts=";
  for (std::size_t i = 0; i < demo_counts.size(); ++i) os << (i ? "," : "") << demo_counts[i];
  os << ";seed=" << seed << ";width=" << width << ";height=" << height
     << ";num_features=" << num_features << ";gamma=" << fmt_double(gamma)
     << ";horizon=" << horizon << ";mcmc=" << mcmc_config_to_json(mcmc).dump();
  return os.str();
}

WorldOutcome run_world(const ExperimentConfig& cfg, int index) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(index);
  Rng world_rng = derive_rng(seed, {0});
  const GridWorld world =
      random_grid_world(cfg.width, cfg.height, cfg.num_features, cfg.gamma, world_rng);
  const RewardWeights truth = sample_ground_truth_reward(cfg.num_features, world_rng);

  WorldOutcome out;
  for (int m : cfg.demo_counts) {
    const auto um = static_cast<std::uint64_t>(m);
    Rng demo_rng = derive_rng(seed, {1, um});
    PreferenceDataset brex_data;
    std::vector<std::pair<int, int>> birl_pairs;
    switch (cfg.ablation) {
      case Ablation::RankedVsOptimal: {
        brex_data = generate_ranked_random_demos(world, truth, m, cfg.horizon, demo_rng);
        const auto optimal =
            generate_optimal_demos(world, truth, cfg.horizon, start_states(brex_data), demo_rng);
        birl_pairs = dedup_state_actions(optimal.trajectories);
        break;
      }
      case Ablation::OnlyRanked: {
        brex_data = generate_ranked_random_demos(world, truth, m, cfg.horizon, demo_rng);
        birl_pairs = dedup_state_actions(brex_data.trajectories);
        break;
      }
      case Ablation::OnlyOptimal: {
        std::vector<int> starts(static_cast<std::size_t>(m));
        for (int& s : starts) s = uniform_int(demo_rng, 0, world.num_states() - 1);
        const auto optimal = generate_optimal_demos(world, truth, cfg.horizon, starts, demo_rng);
        birl_pairs = dedup_state_actions(optimal.trajectories);
        brex_data = auto_rank_vs_random(optimal, world, m, cfg.horizon, demo_rng);
        break;
      }
    }

    try {
      Rng rng = derive_rng(seed, {2, um});
      out.brex.push_back(loss_for(world, truth, run_mcmc(brex_data, cfg.mcmc, rng), cfg.mcmc));
    } catch (const std::exception& e) {
      out.brex.push_back(std::nullopt);
      out.errors.push_back("world " + std::to_string(index) + " m=" + std::to_string(m) +
                           " brex: " + e.what());
    }
    try {
      Rng rng = derive_rng(seed, {3, um});
      const BirlResult birl = run_mcmc_birl(world, birl_pairs, cfg.mcmc, rng);
      out.birl.push_back(loss_for(world, truth, birl.chain, cfg.mcmc));
    } catch (const std::exception& e) {
      out.birl.push_back(std::nullopt);
      out.errors.push_back("world " + std::to_string(index) + " m=" + std::to_string(m) +
                           " birl: " + e.what());
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.worlds.resize(static_cast<std::size_t>(cfg.n_worlds));

  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < cfg.n_worlds; i = next++) result.worlds[i] = run_world(cfg, i);
  };
  const int n_threads = std::min(cfg.workers, cfg.n_worlds);
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (std::size_t j = 0; j < cfg.demo_counts.size(); ++j) {
    ExperimentRow row;
    row.demo_count = cfg.demo_counts[j];
    double birl_sum = 0.0, brex_sum = 0.0;
    int birl_n = 0, brex_n = 0;
    for (const auto& w : result.worlds) {
      if (w.birl[j]) {
        birl_sum += *w.birl[j];
        ++birl_n;
      } else {
        ++row.birl_failures;
      }
      if (w.brex[j]) {
        brex_sum += *w.brex[j];
        ++brex_n;
      } else {
        ++row.brex_failures;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.birl_loss = birl_n ? birl_sum / birl_n : nan;
    row.brex_loss = brex_n ? brex_sum / brex_n : nan;
    result.rows.push_back(row);
  }
  for (const auto& w : result.worlds)
    for (const auto& e : w.errors) log_warning("skipped " + e);
  return result;
}

std::string ExperimentResult::to_csv() const {
  std::ostringstream os;
  int birl_failures = 0, brex_failures = 0;
  for (const auto& r : rows) {
    birl_failures += r.birl_failures;
    brex_failures += r.brex_failures;
  }
  os << "# format: brex-experiment/1\n"
     << "# ablation: " << to_string(config.ablation) << "\n"
     << "# seed: " << config.seed << "\n"
     << "# n_worlds: " << config.n_worlds << "\n"
     << "# config: " << config.canonical() << "\n"
     << "# config_hash: " << hex64(fnv1a64(config.canonical())) << "\n"
     << "# failures: birl=" << birl_failures << " brex=" << brex_failures << "\n";
  os << "demo_count,birl_loss,brex_loss\n";
  for (const auto& r : rows)
    os << r.demo_count << ',' << fmt_loss(r.birl_loss) << ',' << fmt_loss(r.brex_loss) << '\n';
  return os.str();
}

std::string BenchResult::to_json() const {
  nlohmann::json j;
  j["format"] = "brex-bench/1";
  j["n_prefs"] = n_prefs;
  j["k"] = k;
  j["n_proposals"] = n_proposals;
  j["seconds"] = seconds;
  j["proposals_per_second"] = proposals_per_second;
  j["acceptance_rate"] = acceptance_rate;
  if (brex_seconds_per_proposal) {
    j["gridworld_brex_seconds_per_proposal"] = *brex_seconds_per_proposal;
    j["gridworld_birl_seconds_per_proposal"] = *birl_seconds_per_proposal;
    j["gridworld_cost_ratio"] = *birl_seconds_per_proposal / *brex_seconds_per_proposal;
    j["birl_value_iteration_calls"] = birl_value_iteration_calls;
  }
  return j.dump(2);
}

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.n_trajectories < 2 || cfg.k < 1 || cfg.n_proposals < 1)
    throw std::invalid_argument("bench needs at least 2 trajectories, k >= 1 and one proposal");
  using Clock = std::chrono::steady_clock;

  Rng data_rng = derive_rng(cfg.seed, {0});
  PreferenceDataset data;
  data.ranking_source = RankingSource::GroundTruth;
  const auto truth = random_unit_vector(cfg.k, data_rng);
  std::vector<double> returns;
  for (int i = 0; i < cfg.n_trajectories; ++i) {
    std::vector<double> phi(static_cast<std::size_t>(cfg.k));
    for (double& x : phi) x = standard_normal(data_rng);
    returns.push_back(dot(truth, phi));
    data.trajectories.emplace_back();
    data.feature_sums.push_back(std::move(phi));
  }
  std::vector<int> order(returns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return returns[a] < returns[b]; });
  data.prefs = prefs_from_order(order);

  McmcConfig mcmc;
  mcmc.beta = cfg.beta;
  mcmc.step_sigma = cfg.step_sigma;
  mcmc.n_steps = cfg.n_proposals;
  mcmc.burn_in = 0;
  mcmc.thin = 1;
  mcmc.seed = cfg.seed;

  BenchResult out;
  out.n_prefs = static_cast<int>(data.prefs.size());
  out.k = cfg.k;
  out.n_proposals = cfg.n_proposals;
  Rng rng = derive_rng(cfg.seed, {1});
  const auto t0 = Clock::now();
  const PosteriorChain chain = run_mcmc(data, mcmc, rng);
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  out.proposals_per_second = cfg.n_proposals / std::max(out.seconds, 1e-12);
  out.acceptance_rate = chain.acceptance_rate();

  if (cfg.birl_proposals > 0) {
    Rng world_rng = derive_rng(cfg.seed, {2});
    const GridWorld world = random_grid_world(6, 6, 4, 0.9, world_rng);
    const RewardWeights truth_w = sample_ground_truth_reward(4, world_rng);
    const auto ranked = generate_ranked_random_demos(world, truth_w, 10, 20, world_rng);
    const auto pairs = dedup_state_actions(ranked.trajectories);
    McmcConfig grid = McmcConfig::gridworld_defaults();
    grid.n_steps = cfg.birl_proposals;
    grid.burn_in = 0;
    grid.thin = 1;

    Rng r1 = derive_rng(cfg.seed, {3});
    auto t1 = Clock::now();
    run_mcmc(ranked, grid, r1);
    out.brex_seconds_per_proposal =
        std::chrono::duration<double>(Clock::now() - t1).count() / cfg.birl_proposals;

    Rng r2 = derive_rng(cfg.seed, {4});
    t1 = Clock::now();
    const BirlResult birl = run_mcmc_birl(world, pairs, grid, r2);
    out.birl_seconds_per_proposal =
        std::chrono::duration<double>(Clock::now() - t1).count() / cfg.birl_proposals;
    out.birl_value_iteration_calls = birl.value_iteration_calls;
  }
  return out;
}

}  // namespace brex
