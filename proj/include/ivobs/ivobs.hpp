/// @file ivobs.hpp
/// @brief Umbrella header.

#pragma once

#include "ivobs/envelope.hpp"
#include "ivobs/error_analysis.hpp"
#include "ivobs/errors.hpp"
#include "ivobs/integrator.hpp"
#include "ivobs/invariance.hpp"
#include "ivobs/model.hpp"
#include "ivobs/observer.hpp"
#include "ivobs/quadrature.hpp"
#include "ivobs/report.hpp"
#include "ivobs/scenario.hpp"
#include "ivobs/trace.hpp"
#include "ivobs/verification.hpp"
