#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "wdec/param.hpp"

namespace wdec {

struct AdamConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct MomentState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

// Adam with decoupled weight decay: decayed parameters are first shrunk by
// (1 - lr * wd), then take the bias-corrected adaptive step. Only
// ParamKind::weight decays.
class Adam {
public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Throws NumericError naming the parameter when a gradient is not finite;
  // no parameter is modified in that case.
  void step(std::span<Parameter* const> params);

  const MomentState* state(const Parameter& p) const;
  const AdamConfig& config() const { return config_; }

private:
  AdamConfig config_;
  std::unordered_map<const Parameter*, MomentState> state_;
};

}  // namespace wdec
