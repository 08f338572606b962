#include "brex/hcpe.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace brex {

std::vector<double> posterior_returns(const PosteriorChain& chain, std::span<const double> phi_eval) {
  if (static_cast<int>(phi_eval.size()) != chain.k)
    throw std::invalid_argument("feature expectation dimension does not match the chain");
  std::vector<double> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) out[i] = dot(chain.sample(i), phi_eval);
  return out;
}

std::size_t var_order_index(std::size_t n, double delta) {
  // Smallest integer r with r >= delta n; the slack absorbs representation
  // error in delta (0.05 * 100 must give 5, not 6).
  const double scaled = delta * static_cast<double>(n);
  auto r = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  return std::clamp<std::size_t>(r, 1, n);
}

double var_bound(std::span<const double> returns, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (returns.empty()) throw std::invalid_argument("need at least one return sample");
  std::vector<double> work(returns.begin(), returns.end());
  const std::size_t idx = var_order_index(work.size(), delta) - 1;
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(idx), work.end());
  return work[idx];
}

EvalRow summarize_returns(const std::string& name, std::span<const double> returns, double delta) {
  EvalRow row;
  row.name = name;
  double total = 0.0;
  for (double r : returns) total += r;
  row.mean = total / static_cast<double>(returns.size());
  row.var = var_bound(returns, delta);
  return row;
}

EvalReport evaluate_return_samples(const std::vector<EvalPolicy>& policies,
                                   const std::vector<std::vector<double>>& returns, double delta) {
  if (policies.size() != returns.size()) throw std::invalid_argument("one return sample per policy");
  EvalReport report;
  report.delta = delta;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    EvalRow row = summarize_returns(policies[i].name, returns[i], delta);
    row.true_return = policies[i].true_return;
    row.length = policies[i].length;
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const EvalRow& a, const EvalRow& b) { return a.var > b.var; });
  return report;
}

EvalReport evaluate_policies(const PosteriorChain& chain, const std::vector<EvalPolicy>& policies,
                             double delta) {
  std::vector<std::vector<double>> returns;
  returns.reserve(policies.size());
  for (const auto& p : policies) returns.push_back(posterior_returns(chain, p.phi));
  return evaluate_return_samples(policies, returns, delta);
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  if (!provenance.empty()) os << "# " << provenance << '\n';
  os << "# delta=" << delta << " statistic=expected-return\n";
  os << "policy,mean_return,var_bound,true_return,length\n";
  for (const auto& r : rows) {
    os << r.name << ',' << r.mean << ',' << r.var << ',';
    if (r.true_return) os << *r.true_return;
    os << ',' << r.length << '\n';
  }
  return os.str();
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["delta"] = delta;
  j["statistic"] = "expected-return";
  j["provenance"] = provenance;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"policy", r.name}, {"mean_return", r.mean}, {"var_bound", r.var},
                       {"length", r.length}};
    row["true_return"] = r.true_return ? nlohmann::json(*r.true_return) : nlohmann::json(nullptr);
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2);
}

RerankResult rerank_with_new_demo(const PreferenceDataset& data, const Trajectory& new_traj,
                                  const FeatureTable& table, RankPosition position,
                                  const McmcConfig& cfg, Rng& rng) {
  const int existing = data.size();
  if (existing > 0 && table.dim() != data.feature_dim())
    throw std::invalid_argument("new trajectory featurizes to a different dimension");
  RerankResult out{data, {}};
  out.data.add_trajectory(table, new_traj);
  const int idx = existing;
  for (int i = 0; i < existing; ++i) {
    if (position == RankPosition::Worst)
      out.data.prefs.push_back({idx, i});
    else
      out.data.prefs.push_back({i, idx});
  }
  out.chain = run_mcmc(out.data, cfg, rng);
  return out;
}

}  // namespace brex
