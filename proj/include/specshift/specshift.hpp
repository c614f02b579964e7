#pragma once

// Convenience header pulling in the whole library.

#include "specshift/analytic.hpp"
#include "specshift/contour.hpp"
#include "specshift/core.hpp"
#include "specshift/coupling.hpp"
#include "specshift/family.hpp"
#include "specshift/functional_calculus.hpp"
#include "specshift/herglotz.hpp"
#include "specshift/hermitian.hpp"
#include "specshift/instance.hpp"
#include "specshift/interval.hpp"
#include "specshift/quadrature.hpp"
#include "specshift/random.hpp"
#include "specshift/serialize.hpp"
#include "specshift/shift.hpp"
#include "specshift/smooth_function.hpp"
#include "specshift/step_function.hpp"
#include "specshift/version.hpp"
