#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brex/birl.hpp"
#include "brex/demos.hpp"
#include "brex/experiment.hpp"
#include "brex/hcpe.hpp"
#include "brex/io.hpp"
#include "brex/mdp.hpp"
#include "brex/rex.hpp"

namespace py = pybind11;
using namespace brex;

namespace {

py::array_t<double> samples_array(const PosteriorChain& chain) {
  py::array_t<double> out({static_cast<py::ssize_t>(chain.size()), static_cast<py::ssize_t>(chain.k)});
  std::copy(chain.samples.begin(), chain.samples.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_brex, m) {
  m.doc() = "Bayesian reward extrapolation, Bayesian IRL and VaR policy evaluation";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<GridWorld>(m, "GridWorld")
      .def_property_readonly("width", &GridWorld::width)
      .def_property_readonly("height", &GridWorld::height)
      .def_property_readonly("num_states", &GridWorld::num_states)
      .def_property_readonly("num_actions", &GridWorld::num_actions)
      .def_property_readonly("num_features", &GridWorld::num_features)
      .def_property_readonly("gamma", &GridWorld::gamma)
      .def("features", [](const GridWorld& w, int s) {
        w.check_state(s);
        const auto phi = w.features(s);
        return std::vector<double>(phi.begin(), phi.end());
      })
      .def("to_json", [](const GridWorld& w) { return world_to_json(w).dump(); });

  m.def(
      "random_grid_world",
      [](int width, int height, int num_features, double gamma, std::uint64_t seed) {
        Rng rng(seed);
        return random_grid_world(width, height, num_features, gamma, rng);
      },
      py::arg("width") = 6, py::arg("height") = 6, py::arg("num_features") = 4, py::arg("gamma") = 0.9,
      py::arg("seed") = 0);

  m.def(
      "sample_ground_truth_reward",
      [](int k, std::uint64_t seed) {
        Rng rng(seed);
        return sample_ground_truth_reward(k, rng).w;
      },
      py::arg("k"), py::arg("seed") = 0);

  m.def(
      "optimal_values",
      [](const GridWorld& world, const std::vector<double>& w) { return value_iteration(world, w).v; },
      py::arg("world"), py::arg("w"));

  m.def(
      "policy_loss",
      [](const GridWorld& world, const std::vector<double>& learned_w, const std::vector<double>& true_w) {
        return policy_loss(world, greedy_policy(value_iteration(world, learned_w)), true_w);
      },
      py::arg("world"), py::arg("learned_w"), py::arg("true_w"),
      "Value lost by acting greedily on learned_w, measured under true_w.");

  py::class_<Preference>(m, "Preference")
      .def(py::init<>())
      .def_readwrite("worse", &Preference::worse)
      .def_readwrite("better", &Preference::better);

  py::class_<PreferenceDataset>(m, "PreferenceDataset")
      .def(py::init<>())
      .def_property_readonly("size", &PreferenceDataset::size)
      .def_readwrite("feature_sums", &PreferenceDataset::feature_sums)
      .def_property(
          "prefs",
          [](const PreferenceDataset& d) {
            std::vector<std::pair<int, int>> out;
            for (const auto& p : d.prefs) out.emplace_back(p.worse, p.better);
            return out;
          },
          [](PreferenceDataset& d, const std::vector<std::pair<int, int>>& prefs) {
            d.prefs.clear();
            for (const auto& [w, b] : prefs) d.prefs.push_back({w, b});
          },
          "(worse, better) index pairs")
      .def_property_readonly("lowest_ranked", &PreferenceDataset::lowest_ranked)
      .def("validate", &PreferenceDataset::validate)
      .def("to_json", [](const PreferenceDataset& d) { return dataset_to_json(d).dump(); })
      .def_static("from_json", [](const std::string& text) { return dataset_from_json(nlohmann::json::parse(text)); })
      .def_static(
          "from_feature_sums",
          [](std::vector<std::vector<double>> sums, const std::vector<std::pair<int, int>>& prefs) {
            PreferenceDataset d;
            d.trajectories.resize(sums.size());
            d.feature_sums = std::move(sums);
            for (const auto& [w, b] : prefs) d.prefs.push_back({w, b});
            d.validate();
            return d;
          },
          py::arg("feature_sums"), py::arg("prefs"));

  m.def(
      "ranked_random_demos",
      [](const GridWorld& world, const std::vector<double>& true_w, int m, int horizon, std::uint64_t seed) {
        Rng rng(seed);
        return generate_ranked_random_demos(world, {true_w, NormTag::Unconstrained}, m, horizon, rng);
      },
      py::arg("world"), py::arg("true_w"), py::arg("m"), py::arg("horizon") = 20, py::arg("seed") = 0);

  m.def("ranking_log_likelihood",
        [](const std::vector<double>& w, const PreferenceDataset& d, double beta) {
          return ranking_log_likelihood(w, d, beta);
        },
        py::arg("w"), py::arg("data"), py::arg("beta"));

  py::class_<McmcConfig>(m, "McmcConfig")
      .def(py::init<>())
      .def_readwrite("beta", &McmcConfig::beta)
      .def_readwrite("step_sigma", &McmcConfig::step_sigma)
      .def_readwrite("n_steps", &McmcConfig::n_steps)
      .def_readwrite("burn_in", &McmcConfig::burn_in)
      .def_readwrite("thin", &McmcConfig::thin)
      .def_static("gridworld_defaults", &McmcConfig::gridworld_defaults)
      .def_static("deep_defaults", &McmcConfig::deep_defaults);

  py::class_<PosteriorChain>(m, "PosteriorChain")
      .def_readonly("k", &PosteriorChain::k)
      .def_readonly("log_post", &PosteriorChain::log_post)
      .def_readonly("proposals", &PosteriorChain::proposals)
      .def_readonly("accept_count", &PosteriorChain::accept_count)
      .def_property_readonly("acceptance_rate", &PosteriorChain::acceptance_rate)
      .def_property_readonly("samples", &samples_array, "(n, k) array of unit-norm weight samples")
      .def("__len__", &PosteriorChain::size)
      .def("retained", &PosteriorChain::retained, py::arg("burn_in"), py::arg("thin"))
      .def("mean", [](const PosteriorChain& c, int burn, int thin) { return chain_mean(c, burn, thin).weights.w; },
           py::arg("burn_in") = 0, py::arg("thin") = 1)
      .def("to_bytes", [](const PosteriorChain& c) { return py::bytes(encode_sample_file(kMagicRex, c)); });

  m.def(
      "run_brex",
      [](const PreferenceDataset& d, const McmcConfig& cfg, std::uint64_t seed) {
        Rng rng(seed);
        py::gil_scoped_release release;
        return run_mcmc(d, cfg, rng);
      },
      py::arg("data"), py::arg("config") = McmcConfig::gridworld_defaults(), py::arg("seed") = 0);

  m.def(
      "run_birl",
      [](const GridWorld& world, const std::vector<std::pair<int, int>>& pairs, const McmcConfig& cfg,
         std::uint64_t seed) {
        Rng rng(seed);
        py::gil_scoped_release release;
        return run_mcmc_birl(world, pairs, cfg, rng).chain;
      },
      py::arg("world"), py::arg("state_action_pairs"), py::arg("config") = McmcConfig::gridworld_defaults(),
      py::arg("seed") = 0);

  m.def("var_bound", [](const std::vector<double>& r, double delta) { return var_bound(r, delta); },
        py::arg("returns"), py::arg("delta") = 0.05);

  m.def(
      "posterior_returns",
      [](const PosteriorChain& c, const std::vector<double>& phi) { return posterior_returns(c, phi); },
      py::arg("chain"), py::arg("phi"));

  m.def(
      "evaluate_policies",
      [](const PosteriorChain& chain, const std::vector<std::pair<std::string, std::vector<double>>>& policies,
         double delta) {
        std::vector<EvalPolicy> pols;
        for (const auto& [name, phi] : policies) pols.push_back({name, phi, std::nullopt, 0.0});
        py::list rows;
        for (const auto& r : evaluate_policies(chain, pols, delta).rows)
          rows.append(py::dict(py::arg("policy") = r.name, py::arg("mean") = r.mean, py::arg("var") = r.var));
        return rows;
      },
      py::arg("chain"), py::arg("policies"), py::arg("delta") = 0.05,
      "Rows sorted by delta-VaR, highest first. `policies` is a list of (name, phi).");

  m.def(
      "run_experiment",
      [](const std::string& ablation, int n_worlds, std::vector<int> demo_counts, std::uint64_t seed, int workers,
         int n_steps) {
        ExperimentConfig cfg;
        cfg.ablation = ablation_from_string(ablation);
        cfg.n_worlds = n_worlds;
        cfg.demo_counts = std::move(demo_counts);
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.mcmc.n_steps = n_steps;
        cfg.mcmc.burn_in = n_steps / 10;
        py::gil_scoped_release release;
        return run_experiment(cfg).to_csv();
      },
      py::arg("ablation"), py::arg("n_worlds") = 100, py::arg("demo_counts") = std::vector<int>{2, 5, 10, 20, 30},
      py::arg("seed") = 0, py::arg("workers") = 1, py::arg("n_steps") = 10000,
      "Runs a gridworld ablation ('c1', 'c2' or 'c3') and returns the CSV report.");
}
