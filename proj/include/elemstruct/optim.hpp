#pragma once

// Adam with bias correction, keyed by parameter name so moment buffers
// survive checkpointing.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "elemstruct/nn.hpp"

namespace es {

template <class T>
struct AdamState {
  std::map<std::string, std::vector<T>> first_moment;
  std::map<std::string, std::vector<T>> second_moment;
  long step_count = 0;
};

template <class T>
class Adam {
 public:
  T learning_rate = static_cast<T>(1e-3);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);
  AdamState<T> state;

  explicit Adam(T lr = static_cast<T>(1e-3)) : learning_rate(lr) {}

  // Gradients are left untouched; the caller zeroes them.
  void step(ParamStore<T>& params) {
    state.step_count += 1;
    const T bc1 = T(1) - std::pow(beta1, static_cast<T>(state.step_count));
    const T bc2 = T(1) - std::pow(beta2, static_cast<T>(state.step_count));
    for (auto& [name, p] : params.items) {
      if (p->grad.size() != p->values.size())
        throw std::invalid_argument("adam_step: parameter '" + name + "' has no gradient");
      auto& m = state.first_moment[name];
      auto& v = state.second_moment[name];
      if (m.size() != p->values.size()) m.assign(p->values.size(), T(0));
      if (v.size() != p->values.size()) v.assign(p->values.size(), T(0));
      for (std::size_t i = 0; i < p->values.size(); ++i) {
        const T g = p->grad[i];
        m[i] = beta1 * m[i] + (T(1) - beta1) * g;
        v[i] = beta2 * v[i] + (T(1) - beta2) * g * g;
        p->values[i] -= learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + epsilon);
      }
    }
  }
};

}  // namespace es
