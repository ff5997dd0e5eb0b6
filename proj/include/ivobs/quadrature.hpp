/// @file quadrature.hpp
/// @brief Trapezoidal evaluation of variation-of-constants integrals on uniform grids.

#pragma once

#include "ivobs/errors.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace ivobs {

/// Evaluates, at every grid point t_i = t_0 + i dt,
///
///     x(t_i) = x0 exp(-int_0^{t_i} k) + int_0^{t_i} exp(-int_s^{t_i} k) g(s) ds
///
/// with composite trapezoids for both the outer and the inner integral. The decay factor
/// is applied one interval at a time, so nothing underflows over long horizons.
inline std::vector<double> discounted_accumulation(std::span<const double> rate, std::span<const double> source,
                                                   double x0, double dt)
{
    if (rate.empty() || rate.size() != source.size()) {
        throw InvalidInput("discounted_accumulation: rate and source must be non-empty and of equal length");
    }
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        throw InvalidInput("discounted_accumulation: grid spacing must be finite and nonnegative");
    }
    std::vector<double> out(rate.size());
    out[0] = x0;
    for (std::size_t i = 0; i + 1 < rate.size(); ++i) {
        const double decay = std::exp(-0.5 * dt * (rate[i] + rate[i + 1]));
        out[i + 1] = decay * out[i] + 0.5 * dt * (decay * source[i] + source[i + 1]);
    }
    return out;
}

/// Composite trapezoid of uniformly sampled values.
inline double trapezoid(std::span<const double> values, double dt)
{
    if (values.size() < 2) {
        return 0.0;
    }
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        sum += values[i];
    }
    return sum * dt;
}

} // namespace ivobs
