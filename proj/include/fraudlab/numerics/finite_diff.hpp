#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fraudlab/common.hpp"

namespace fraudlab::numerics {

// A scalar function of a flat parameter vector together with its analytic
// gradient (normally produced by Graph::backward).
struct DifferentiableScalarFn {
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
inline double finite_difference_check(const DifferentiableScalarFn& f,
                                      const std::vector<double>& theta,
                                      double h) {
  if (h < 1e-7 || h > 1e-3) throw data_error("finite_difference_check: h out of range");
  std::vector<double> analytic = f.gradient(theta);
  double worst = 0.0;
  std::vector<double> probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = f.value(probe);
    probe[i] = theta[i] - h;
    const double down = f.value(probe);
    probe[i] = theta[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw data_error("non-finite function value");
    const double numeric = (up - down) / (2.0 * h);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace fraudlab::numerics
