#include "brex/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace brex {

AdamW::AdamW(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("optimizer size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double update = (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    params[i] -= cfg_.learning_rate * (update + cfg_.weight_decay * params[i]);
  }
}

}  // namespace brex
