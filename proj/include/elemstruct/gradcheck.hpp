#pragma once

// Finite-difference verification of reverse-mode gradients. Meant to be
// run with double tensors; float loses too much precision at h=1e-5.

#include <cmath>
#include <functional>
#include <vector>

#include "elemstruct/tensor.hpp"

namespace es {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

// `fn` rebuilds the scalar loss from the current values of `inputs`.
// If `max_per_input` is positive, a random subset of coordinates per
// input is checked instead of all of them.
inline GradCheckReport grad_check(const std::function<TensorPtr<double>()>& fn,
                                  const std::vector<TensorPtr<double>>& inputs,
                                  double h = 1e-5, int max_per_input = -1,
                                  Rng* rng = nullptr) {
  for (auto& t : inputs) {
    t->requires_grad = true;
    t->ensure_grad();
    t->zero_grad();
  }
  auto loss = fn();
  if (!std::isfinite(loss->scalar()))
    throw NumericalError("grad_check: non-finite loss value");
  backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    t->ensure_grad();
    for (double g : t->grad)
      if (!std::isfinite(g)) throw NumericalError("grad_check: non-finite analytic gradient");
    analytic.push_back(t->grad);
  }

  GradCheckReport report;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto& t = inputs[ti];
    std::vector<std::size_t> idx;
    if (max_per_input > 0 && t->values.size() > static_cast<std::size_t>(max_per_input) && rng) {
      for (int j = 0; j < max_per_input; ++j) idx.push_back(rng->uniform_int(t->values.size()));
    } else {
      idx.resize(t->values.size());
      for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    }
    for (std::size_t j : idx) {
      const double saved = t->values[j];
      t->values[j] = saved + h;
      const double fp = fn()->scalar();
      t->values[j] = saved - h;
      const double fm = fn()->scalar();
      t->values[j] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericalError("grad_check: non-finite perturbed loss");
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[ti][j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-2});
      report.max_rel_err = std::max(report.max_rel_err, std::fabs(a - numeric) / denom);
      report.checked += 1;
    }
  }
  return report;
}

}  // namespace es
