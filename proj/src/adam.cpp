#include "wdec/adam.hpp"

#include <cmath>

#include "wdec/error.hpp"

namespace wdec {

void Adam::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params)
    for (std::size_t i = 0; i < p->size(); ++i)
      if (!std::isfinite(p->grad[i]))
        throw NumericError(p->name, "non-finite gradient at element " + std::to_string(i));

  const auto& c = config_;
  for (Parameter* p : params) {
    auto& s = state_[p];
    if (s.m.empty()) {
      s.m.assign(p->size(), 0.0);
      s.v.assign(p->size(), 0.0);
    }
    ++s.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
    const double shrink = p->decays() ? 1.0 - c.learning_rate * c.weight_decay : 1.0;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      s.m[i] = c.beta1 * s.m[i] + (1.0 - c.beta1) * g;
      s.v[i] = c.beta2 * s.v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = s.m[i] / bc1;
      const double v_hat = s.v[i] / bc2;
      p->value[i] = p->value[i] * shrink - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

const MomentState* Adam::state(const Parameter& p) const {
  const auto it = state_.find(&p);
  return it == state_.end() ? nullptr : &it->second;
}

}  // namespace wdec
