/// @file envelope.hpp
/// @brief Time-varying transmission rates together with their guaranteed lower/upper bounds.
///
/// An envelope is any type callable as `env(t)` (t in days) returning a TransmissionRates
/// value. Evaluation must be pure: integrator stages re-evaluate it at intermediate times.
/// Envelopes that can compute their own supremum over [0, horizon] expose
/// `supremum(horizon)`; everything else falls back to dense sampling.

#pragma once

#include "ivobs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace ivobs {

/// Rates for both transmission routes at one instant (day^-1).
struct TransmissionRates {
    double beta_vh_lo = 0.0;
    double beta_vh = 0.0;
    double beta_vh_hi = 0.0;
    double beta_hv_lo = 0.0;
    double beta_hv = 0.0;
    double beta_hv_hi = 0.0;

    bool operator==(const TransmissionRates&) const = default;

    /// True when both bound pairs collapse onto a single value.
    bool is_exact() const noexcept { return beta_vh_lo == beta_vh_hi && beta_hv_lo == beta_hv_hi; }
};

/// Throws InvalidInput unless `r` is finite, nonnegative and ordered lo <= true <= hi.
inline void validate_rates(const TransmissionRates& r, const std::string& where = "transmission rates")
{
    const double all[] = {r.beta_vh_lo, r.beta_vh, r.beta_vh_hi, r.beta_hv_lo, r.beta_hv, r.beta_hv_hi};
    for (double v : all) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInput(where + ": rates must be finite and nonnegative");
        }
    }
    if (!(r.beta_vh_lo <= r.beta_vh && r.beta_vh <= r.beta_vh_hi)) {
        throw InvalidInput(where + ": require beta_vh_lo <= beta_vh <= beta_vh_hi");
    }
    if (!(r.beta_hv_lo <= r.beta_hv && r.beta_hv <= r.beta_hv_hi)) {
        throw InvalidInput(where + ": require beta_hv_lo <= beta_hv <= beta_hv_hi");
    }
}

template <class E>
concept TransmissionEnvelope = requires(const E& env, double t) {
    { env(t) } -> std::convertible_to<TransmissionRates>;
};

template <class E>
concept HasAnalyticSupremum = TransmissionEnvelope<E> && requires(const E& env, double horizon) {
    { env.supremum(horizon) } -> std::convertible_to<TransmissionRates>;
};

/// Periodic rates beta(t) = beta_0 (1 + amplitude cos(2 pi t / period)) with bounds
/// (1 -/+ uncertainty) beta(t).
struct SeasonalEnvelope {
    double beta_vh_0 = 0.0;
    double beta_hv_0 = 0.0;
    double amplitude = 0.4;
    double period_days = 365.0;
    double uncertainty = 0.1;

    void validate() const
    {
        if (!(std::isfinite(beta_vh_0) && beta_vh_0 >= 0.0) || !(std::isfinite(beta_hv_0) && beta_hv_0 >= 0.0)) {
            throw InvalidInput("seasonal envelope: baseline rates must be finite and nonnegative");
        }
        if (!(amplitude >= 0.0 && amplitude < 1.0)) {
            throw InvalidInput("seasonal envelope: amplitude must lie in [0, 1)");
        }
        if (!(uncertainty >= 0.0 && uncertainty < 1.0)) {
            throw InvalidInput("seasonal envelope: uncertainty must lie in [0, 1)");
        }
        if (!(std::isfinite(period_days) && period_days > 0.0)) {
            throw InvalidInput("seasonal envelope: period must be positive");
        }
    }

    double seasonal_factor(double t) const noexcept
    {
        return 1.0 + amplitude * std::cos(2.0 * std::numbers::pi * t / period_days);
    }

    TransmissionRates operator()(double t) const noexcept
    {
        const double f = seasonal_factor(t);
        return make_rates(beta_vh_0 * f, beta_hv_0 * f);
    }

    /// The cosine peaks at t = 0, which every horizon [0, T] contains.
    TransmissionRates supremum(double /*horizon*/) const noexcept
    {
        return make_rates(beta_vh_0 * (1.0 + amplitude), beta_hv_0 * (1.0 + amplitude));
    }

private:
    TransmissionRates make_rates(double vh, double hv) const noexcept
    {
        return {(1.0 - uncertainty) * vh, vh, (1.0 + uncertainty) * vh,
                (1.0 - uncertainty) * hv, hv, (1.0 + uncertainty) * hv};
    }
};

/// Rates held constant between tabulated breakpoints. Row i applies on [t_i, t_{i+1});
/// the first row also covers times before t_0 and the last row extends to infinity.
class PiecewiseConstantEnvelope {
public:
    struct Row {
        double t_days = 0.0;
        TransmissionRates rates;
    };

    PiecewiseConstantEnvelope() = default;

    explicit PiecewiseConstantEnvelope(std::vector<Row> rows) : rows_(std::move(rows))
    {
        if (rows_.empty()) {
            throw InvalidInput("piecewise envelope: at least one row is required");
        }
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (!std::isfinite(rows_[i].t_days)) {
                throw InvalidInput("piecewise envelope: breakpoint times must be finite");
            }
            if (i > 0 && !(rows_[i].t_days > rows_[i - 1].t_days)) {
                throw InvalidInput("piecewise envelope: breakpoint times must be strictly increasing");
            }
            validate_rates(rows_[i].rates, "piecewise envelope row " + std::to_string(i));
        }
    }

    const std::vector<Row>& rows() const noexcept { return rows_; }

    TransmissionRates operator()(double t) const
    {
        auto it = std::upper_bound(rows_.begin(), rows_.end(), t,
                                   [](double value, const Row& row) { return value < row.t_days; });
        if (it == rows_.begin()) {
            return rows_.front().rates;
        }
        return std::prev(it)->rates;
    }

    TransmissionRates supremum(double horizon) const
    {
        TransmissionRates sup = (*this)(0.0);
        for (const auto& row : rows_) {
            if (row.t_days > 0.0 && row.t_days <= horizon) {
                sup = elementwise_max(sup, row.rates);
            }
        }
        return sup;
    }

private:
    static TransmissionRates elementwise_max(const TransmissionRates& a, const TransmissionRates& b)
    {
        return {std::max(a.beta_vh_lo, b.beta_vh_lo), std::max(a.beta_vh, b.beta_vh),
                std::max(a.beta_vh_hi, b.beta_vh_hi), std::max(a.beta_hv_lo, b.beta_hv_lo),
                std::max(a.beta_hv, b.beta_hv),       std::max(a.beta_hv_hi, b.beta_hv_hi)};
    }

    std::vector<Row> rows_;
};

/// Closed set of envelope kinds a configuration file can describe.
class AnyEnvelope {
public:
    using Variant = std::variant<SeasonalEnvelope, PiecewiseConstantEnvelope>;

    AnyEnvelope() = default;
    AnyEnvelope(SeasonalEnvelope env) : impl_(std::move(env)) {}
    AnyEnvelope(PiecewiseConstantEnvelope env) : impl_(std::move(env)) {}

    TransmissionRates operator()(double t) const
    {
        return std::visit([t](const auto& env) { return TransmissionRates(env(t)); }, impl_);
    }

    TransmissionRates supremum(double horizon) const
    {
        return std::visit([horizon](const auto& env) { return TransmissionRates(env.supremum(horizon)); }, impl_);
    }

    const Variant& variant() const noexcept { return impl_; }

private:
    Variant impl_;
};

static_assert(HasAnalyticSupremum<SeasonalEnvelope>);
static_assert(HasAnalyticSupremum<PiecewiseConstantEnvelope>);
static_assert(HasAnalyticSupremum<AnyEnvelope>);

} // namespace ivobs
