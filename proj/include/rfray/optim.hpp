#pragma once
// RMSprop with momentum: a leaky second-moment accumulator normalizes each
// gradient before it enters the momentum buffer. All loops that fit scene
// parameters or positions share this one update rule.

#include <cmath>
#include <vector>

#include "rfray/core.hpp"

namespace rfray {

struct RmsProp {
  double lr = 0.03;
  double rho = 0.9;       // second-moment decay
  double momentum = 0.6;  // momentum-buffer decay
  double eps = 1e-8;

  std::vector<double> s, m;

  void reset(std::size_t n) {
    s.assign(n, 0.0);
    m.assign(n, 0.0);
  }

  // theta <- theta - lr * (mu m + g / sqrt(rho s + (1-rho) g^2 + eps)).
  void step(std::vector<double>& theta, const std::vector<double>& grad) {
    if (s.size() != theta.size()) reset(theta.size());
    if (grad.size() != theta.size())
      throw UsageError("optimizer step: gradient/parameter size mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      s[i] = rho * s[i] + (1.0 - rho) * grad[i] * grad[i];
      m[i] = momentum * m[i] + grad[i] / std::sqrt(s[i] + eps);
      theta[i] -= lr * m[i];
    }
  }
};

}  // namespace rfray
