#ifndef SPCE_SPCE_HPP
#define SPCE_SPCE_HPP

#include "spce/math.hpp"
#include "spce/rng.hpp"
#include "spce/inputs.hpp"
#include "spce/basis.hpp"
#include "spce/design.hpp"
#include "spce/selection.hpp"
#include "spce/solvers.hpp"
#include "spce/models.hpp"
#include "spce/bench.hpp"

#endif
