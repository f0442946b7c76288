#pragma once

#include "gpspectra/asymptotics.hpp"
#include "gpspectra/complex_spectrum.hpp"
#include "gpspectra/errors.hpp"
#include "gpspectra/fit.hpp"
#include "gpspectra/kernel.hpp"
#include "gpspectra/oracle.hpp"
#include "gpspectra/pencil.hpp"
#include "gpspectra/quadrature.hpp"
#include "gpspectra/real_spectrum.hpp"
#include "gpspectra/spectrum.hpp"

namespace gpspectra {

inline constexpr const char* version = "1.0.0";

} // namespace gpspectra
