#pragma once

#include <span>
#include <vector>

namespace brex {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.001;  // decoupled: p -= lr * wd * p
};

/// Adam with decoupled weight decay over one flat parameter vector.
class AdamW {
 public:
  AdamW(std::size_t n, AdamConfig cfg);

  void step(std::span<double> params, std::span<const double> grad);
  int steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

}  // namespace brex
