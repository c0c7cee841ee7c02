#pragma once

#include "detlab/types.hpp"

namespace detlab {

/// Bessel function of the first kind, integer order, complex argument.
/// Validated envelope: 0 <= order <= 40, |w| <= 60; arguments outside are rejected.
Complex bessel_j(int order, Complex w);

} // namespace detlab
