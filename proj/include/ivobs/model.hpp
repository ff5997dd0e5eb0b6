/// @file model.hpp
/// @brief Reduced SIR-SI host/vector dynamics and the measured incidence output.
///
/// Time is measured in days and all rates in day^-1. The recovered hosts and susceptible
/// vectors are eliminated through R_h = 1 - S_h - I_h and S_v = 1 - I_v.

#pragma once

#include "ivobs/envelope.hpp"
#include "ivobs/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace ivobs {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Constant demographic and recovery rates.
struct EpidemicParams {
    double mu_h = 0.0;  ///< host birth/death rate
    double mu_v = 0.0;  ///< vector death rate
    double gamma = 0.0; ///< host recovery rate

    /// Positivity plus the host-is-slow ordering mu_h < gamma, mu_h < mu_v.
    void validate() const
    {
        if (!(std::isfinite(mu_h) && std::isfinite(mu_v) && std::isfinite(gamma))) {
            throw InvalidInput("epidemic parameters must be finite");
        }
        if (!(mu_h > 0.0 && mu_v > 0.0 && gamma > 0.0)) {
            throw InvalidInput("epidemic parameters must be strictly positive");
        }
        if (!(mu_h < gamma && mu_h < mu_v)) {
            throw InvalidInput("epidemic parameters require mu_h < gamma and mu_h < mu_v");
        }
    }
};

/// Proportions of susceptible hosts, infective hosts and infective vectors.
struct HostVectorState {
    double S_h = 0.0;
    double I_h = 0.0;
    double I_v = 0.0;

    bool operator==(const HostVectorState&) const = default;

    double R_h() const noexcept { return 1.0 - S_h - I_h; }
    double S_v() const noexcept { return 1.0 - I_v; }

    bool is_finite() const noexcept { return std::isfinite(S_h) && std::isfinite(I_h) && std::isfinite(I_v); }

    /// Membership in {S_h, I_h, I_v >= 0, S_h + I_h <= 1, I_v <= 1}, relaxed by `tol`.
    bool in_simplex(double tol = 0.0) const noexcept
    {
        return S_h >= -tol && I_h >= -tol && I_v >= -tol && S_h + I_h <= 1.0 + tol && I_v <= 1.0 + tol;
    }
};

namespace detail {

inline void require_finite(const HostVectorState& x, const char* op)
{
    if (!x.is_finite()) {
        throw InvalidInput(std::string(op) + ": state has non-finite components");
    }
}

inline void require_finite(double t, const char* op)
{
    if (!std::isfinite(t)) {
        throw InvalidInput(std::string(op) + ": time is not finite");
    }
}

} // namespace detail

/// y = beta_vh(t) S_h I_v, the number of new infected hosts per unit time.
template <TransmissionEnvelope Env>
double incidence_output(const HostVectorState& x, double t, const Env& env)
{
    detail::require_finite(x, "incidence_output");
    detail::require_finite(t, "incidence_output");
    const TransmissionRates r = env(t);
    return r.beta_vh * x.S_h * x.I_v;
}

/// Right-hand side of the reduced model, evaluated with the true transmission rates.
template <TransmissionEnvelope Env>
Vec3 reduced_dynamics(const HostVectorState& x, double t, const EpidemicParams& p, const Env& env)
{
    detail::require_finite(x, "reduced_dynamics");
    detail::require_finite(t, "reduced_dynamics");
    const TransmissionRates r = env(t);
    const double new_infections = r.beta_vh * x.S_h * x.I_v;
    return {
        p.mu_h - new_infections - p.mu_h * x.S_h,
        new_infections - (p.mu_h + p.gamma) * x.I_h,
        r.beta_hv * (1.0 - x.I_v) * x.I_h - p.mu_v * x.I_v,
    };
}

/// R0 = beta_vh beta_hv / ((mu_h + gamma) mu_v) for constant transmission rates.
inline double basic_reproduction_ratio(const EpidemicParams& p, double beta_vh, double beta_hv)
{
    const double denominator = (p.mu_h + p.gamma) * p.mu_v;
    if (!(denominator > 0.0) || !std::isfinite(denominator)) {
        throw InvalidInput("basic_reproduction_ratio: (mu_h + gamma) mu_v must be positive");
    }
    if (!(beta_vh >= 0.0 && beta_hv >= 0.0)) {
        throw InvalidInput("basic_reproduction_ratio: transmission rates must be nonnegative");
    }
    return beta_vh * beta_hv / denominator;
}

/// Constant-rate envelope with no uncertainty; handy for tests and point evaluations.
struct ConstantEnvelope {
    TransmissionRates rates;

    static ConstantEnvelope exact(double beta_vh, double beta_hv)
    {
        return {{beta_vh, beta_vh, beta_vh, beta_hv, beta_hv, beta_hv}};
    }

    TransmissionRates operator()(double /*t*/) const noexcept { return rates; }
    TransmissionRates supremum(double /*horizon*/) const noexcept { return rates; }
};

} // namespace ivobs
