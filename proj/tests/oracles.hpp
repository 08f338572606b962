#pragma once
// Reference computations written independently of the library, shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "brex/demos.hpp"
#include "brex/embed.hpp"
#include "brex/rex.hpp"

namespace oracle {

// Pairwise ranking log-likelihood evaluated state by state: every trajectory
// return is re-summed from per-state rewards w.phi(s) for every pair.
inline double naive_ranking_loglik(const brex::PreferenceDataset& data,
                                   const brex::FeatureTable& table, const std::vector<double>& w,
                                   double beta) {
  auto ret = [&](int i) {
    double r = 0.0;
    for (int s : data.trajectories[i].states) {
      const auto phi = table.row(s);
      double rs = 0.0;
      for (int j = 0; j < table.dim(); ++j) rs += w[j] * phi[j];
      r += rs;
    }
    return r;
  };
  double total = 0.0;
  for (const auto& p : data.prefs) {
    const double a = beta * ret(p.better);
    const double b = beta * ret(p.worse);
    const double top = std::max(a, b);
    total += a - (top + std::log(std::exp(a - top) + std::exp(b - top)));
  }
  return total;
}

// Order statistic by full sort: the ceil(delta N)-th smallest (1-based).
inline double sorted_var(std::vector<double> xs, double delta) {
  std::sort(xs.begin(), xs.end());
  const double pos = delta * static_cast<double>(xs.size());
  auto idx = static_cast<std::size_t>(std::ceil(pos - 1e-9 * std::max(1.0, pos)));
  idx = std::clamp<std::size_t>(idx, 1, xs.size());
  return xs[idx - 1];
}

inline double angle_of(double x, double y) { return std::atan2(y, x); }

// Probability mass per angular bin of the posterior exp(log_density(cos t, sin t))
// on the unit circle, by the trapezoid rule on `grid` equally spaced angles in
// [-pi, pi). `grid` must be a multiple of `bins`.
template <typename F>
std::vector<double> circle_posterior_bins(F&& log_density, int grid, int bins) {
  const double pi = std::numbers::pi;
  std::vector<double> lp(static_cast<std::size_t>(grid) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= grid; ++j) {
    const double t = -pi + 2.0 * pi * j / grid;
    lp[j] = log_density(std::vector<double>{std::cos(t), std::sin(t)});
    top = std::max(top, lp[j]);
  }
  std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
  const int per_bin = grid / bins;
  double total = 0.0;
  for (int j = 0; j < grid; ++j) {
    const double seg = 0.5 * (std::exp(lp[j] - top) + std::exp(lp[j + 1] - top));
    mass[j / per_bin] += seg;
    total += seg;
  }
  for (double& m : mass) m /= total;
  return mass;
}

inline std::vector<double> histogram_bins(const std::vector<double>& angles, int bins) {
  const double pi = std::numbers::pi;
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double a : angles) {
    int b = static_cast<int>(std::floor((a + pi) / (2.0 * pi) * bins));
    h[std::clamp(b, 0, bins - 1)] += 1.0;
  }
  for (double& x : h) x /= static_cast<double>(angles.size());
  return h;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

// Relative error used by the gradient checks, floored at 1e-6 in the denominator.
inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace oracle
