/// @file invariance.hpp
/// @brief Checks that a sampled host/vector trajectory is consistent with the model.
///
/// Each state component obeys a scalar linear ODE dx/dt = -k(t) x + g(t) once the other
/// components are viewed as given signals, so it must match its variation-of-constants
/// representation. The residuals are independent of whatever integrator produced the samples.

#pragma once

#include "ivobs/model.hpp"
#include "ivobs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ivobs {

struct IntegralFormResiduals {
    double S_h = 0.0;
    double I_h = 0.0;
    double I_v = 0.0;

    double max() const noexcept { return std::max({S_h, I_h, I_v}); }
};

/// Maximum absolute gap between each sampled component and its integral representation
///
///   S_h(t) = S_h(0) e^{-int(mu_h + beta_vh I_v)} + mu_h int e^{-int_s^t(mu_h + beta_vh I_v)} ds
///   I_h(t) = I_h(0) e^{-(mu_h + gamma) t} + int e^{-(mu_h + gamma)(t - s)} beta_vh S_h I_v ds
///   I_v(t) = I_v(0) e^{-int(mu_v + beta_hv I_h)} + int e^{-int_s^t(mu_v + beta_hv I_h)} beta_hv I_h ds
///
/// evaluated by composite trapezoid on the samples' grid t_i = t0 + i dt.
template <TransmissionEnvelope Env>
IntegralFormResiduals integral_form_oracle(std::span<const HostVectorState> trajectory, double dt, const Env& env,
                                           const EpidemicParams& p, double t0 = 0.0)
{
    if (trajectory.size() < 2) {
        throw InvalidInput("integral_form_oracle: at least two samples are required");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInput("integral_form_oracle: grid spacing must be positive");
    }
    const std::size_t n = trajectory.size();
    std::vector<double> kS(n), gS(n), kH(n), gH(n), kV(n), gV(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = trajectory[i];
        const TransmissionRates r = env(t0 + static_cast<double>(i) * dt);
        kS[i] = p.mu_h + r.beta_vh * x.I_v;
        gS[i] = p.mu_h;
        kH[i] = p.mu_h + p.gamma;
        gH[i] = r.beta_vh * x.S_h * x.I_v;
        kV[i] = p.mu_v + r.beta_hv * x.I_h;
        gV[i] = r.beta_hv * x.I_h;
    }
    const auto S = discounted_accumulation(kS, gS, trajectory.front().S_h, dt);
    const auto H = discounted_accumulation(kH, gH, trajectory.front().I_h, dt);
    const auto V = discounted_accumulation(kV, gV, trajectory.front().I_v, dt);

    IntegralFormResiduals res;
    for (std::size_t i = 0; i < n; ++i) {
        res.S_h = std::max(res.S_h, std::abs(trajectory[i].S_h - S[i]));
        res.I_h = std::max(res.I_h, std::abs(trajectory[i].I_h - H[i]));
        res.I_v = std::max(res.I_v, std::abs(trajectory[i].I_v - V[i]));
    }
    return res;
}

} // namespace ivobs
