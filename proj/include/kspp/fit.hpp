#pragma once

#include <cstddef>
#include <vector>

namespace kspp {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

/// Ordinary least squares y = slope*x + intercept.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kspp
