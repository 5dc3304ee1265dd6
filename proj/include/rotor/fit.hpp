#pragma once

#include <span>

namespace rotor {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

/// Ordinary least-squares line through (x, y). Throws InsufficientData when
/// fewer than two points are given or all x coincide.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

} // namespace rotor
