#include "wdec/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wdec/error.hpp"
#include "wdec/loss.hpp"

namespace wdec {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << " max_rel_error=" << max_rel_error;
  for (const auto& w : worst)
    os << "\n  " << w.parameter << "[" << w.index << "] analytic=" << w.analytic << " numeric=" << w.numeric
       << " rel=" << w.rel_error;
  return os.str();
}

GradCheckReport finite_difference_check(std::span<Parameter* const> params, const std::function<double()>& loss,
                                        const std::function<void()>& gradients, const GradCheckOptions& options) {
  gradients();
  std::vector<std::vector<double>> analytic;
  for (const auto* p : params) {
    analytic.push_back(p->grad);
    for (auto& g : analytic.back()) g *= options.corrupt_factor;
  }

  GradCheckReport report;
  Rng rng(derive_seed(options.seed, {0x6664ULL}));
  for (std::size_t gi = 0; gi < params.size(); ++gi) {
    Parameter& p = *params[gi];
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(options.samples_per_group, order.size()));

    double h = options.step;
    if (p.kind == ParamKind::frequency) {
      // Squeezed centres live on a 1/140 scale.
      h = std::abs(p.value[0]) <= 1.5 ? options.frequency_step / 140.0 : options.frequency_step;
    }

    GradCheckEntry worst{p.name, 0, 0.0, 0.0, -1.0};
    for (std::size_t idx : order) {
      const double saved = p.value[idx];
      p.value[idx] = saved + h;
      const double up = loss();
      p.value[idx] = saved - h;
      const double down = loss();
      p.value[idx] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[gi][idx];
      const double rel = std::abs(a - numeric) / std::max(options.abs_floor, std::abs(numeric));
      if (rel > worst.rel_error) worst = {p.name, idx, a, numeric, rel};
    }
    loss();  // leave derived state consistent with restored values
    report.max_rel_error = std::max(report.max_rel_error, worst.rel_error);
    if (worst.rel_error > options.tolerance) report.passed = false;
    report.worst.push_back(worst);
  }
  return report;
}

namespace {

Matrix pooled_for(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx) {
  Matrix pooled(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(kPooledSize));
  for (std::size_t r = 0; r < idx.size(); ++r)
    model.extractor().pooled(dataset.window(idx[r]), {pooled.row(static_cast<Eigen::Index>(r)).data(), kPooledSize});
  return pooled;
}

}  // namespace

double model_loss(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx) {
  model.sync();
  const Matrix pooled = pooled_for(model, dataset, idx);
  const Matrix normalized = model.extractor().normalize(pooled, true);
  const Matrix pred = model.head().forward(normalized, true, nullptr);
  return cosine_loss(target_rows(dataset, idx, model.out_steps()), pred);
}

void model_gradients(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx) {
  model.sync();
  model.zero_grad();
  const Matrix pooled = pooled_for(model, dataset, idx);
  const Matrix normalized = model.extractor().normalize(pooled, true);
  const Matrix pred = model.head().forward(normalized, true, nullptr);
  const LossGrad lg = cosine_loss_grad(target_rows(dataset, idx, model.out_steps()), pred);
  const Matrix d_norm = model.head().backward(lg.grad);
  const Matrix d_pooled = model.extractor().normalize_backward(d_norm);
  if (model.extractor().kernels_trainable()) {
    for (std::size_t r = 0; r < idx.size(); ++r)
      model.extractor().backward_kernels(dataset.window(idx[r]),
                                         {d_pooled.row(static_cast<Eigen::Index>(r)).data(), kPooledSize}, nullptr);
    model.extractor().finish_backward();
  }
}

GradCheckReport check_model_gradients(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx,
                                      std::span<Parameter* const> params, const GradCheckOptions& options) {
  return finite_difference_check(
      params, [&] { return model_loss(model, dataset, idx); }, [&] { model_gradients(model, dataset, idx); }, options);
}

}  // namespace wdec
