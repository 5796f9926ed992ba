#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "autograd.hpp"
#include "doctest.h"

namespace kpforge::testing {

inline std::string data_path(const std::string& name) { return std::string(KPF_TEST_DATA) + "/" + name; }

struct GradCheck {
  double max_rel_error = 0;
  std::string worst;
  std::size_t checked = 0;
};

// Compares tape gradients of `build` (which must return a 1x1 loss) against
// central differences for every scalar of every parameter in `store`.
inline GradCheck gradient_check(ParamStore& store, const std::function<Var(Tape&)>& build, double step = 1e-5) {
  store.zero_grad();
  {
    Tape tape;
    tape.backward(build(tape));
  }
  auto value = [&] {
    Tape tape(false);
    return tape.scalar(build(tape));
  };
  GradCheck out;
  for (auto& p : store.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data[i];
      p.value.data[i] = saved + step;
      const double up = value();
      p.value.data[i] = saved - step;
      const double down = value();
      p.value.data[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double analytic = p.grad.data[i];
      // Relative error with an absolute floor for gradients that are ~0.
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = p.name + "[" + std::to_string(i) + "] analytic=" + std::to_string(analytic) +
                    " numeric=" + std::to_string(numeric);
      }
      ++out.checked;
    }
  }
  return out;
}

}  // namespace kpforge::testing
