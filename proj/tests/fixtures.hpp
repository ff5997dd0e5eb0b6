#pragma once

#include "ivobs/ivobs.hpp"

#include <random>

namespace fixtures {

inline ivobs::EpidemicParams reference_params()
{
    return {3.4e-5, 0.025, 0.14};
}

inline constexpr double kBetaVh0 = 0.2102;
inline constexpr double kBetaHv0 = 0.1;

inline ivobs::SeasonalEnvelope seasonal(double uncertainty = 0.1)
{
    return {kBetaVh0, kBetaHv0, 0.4, 365.0, uncertainty};
}

inline ivobs::GainHyperParams default_gains()
{
    return {};
}

inline ivobs::State9 reference_initial()
{
    return {{0.2, 0.0, 0.005}, {{0.1, 0.01, 0.01}, {0.8, 0.0, 0.0}}};
}

/// Random host/vector state inside the invariant simplex.
inline ivobs::HostVectorState random_state(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double S = u(rng);
    const double I = (1.0 - S) * u(rng);
    return {S, I, u(rng)};
}

/// Random observer pair bracketing x, with every bound inside [0, 1].
inline ivobs::ObserverPairState random_bracket(const ivobs::HostVectorState& x, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto below = [&](double v) { return v * u(rng); };
    auto above = [&](double v) { return v + (1.0 - v) * u(rng); };
    return {{below(x.S_h), above(x.I_h), above(x.I_v)}, {above(x.S_h), below(x.I_h), below(x.I_v)}};
}

} // namespace fixtures
