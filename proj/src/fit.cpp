#include "rotor/fit.hpp"

#include <cmath>

#include "rotor/errors.hpp"

namespace rotor {

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw InvalidInput("least_squares: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 2)
        throw InsufficientData("least_squares: need at least two points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw InsufficientData("least_squares: abscissae are all equal");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

} // namespace rotor
