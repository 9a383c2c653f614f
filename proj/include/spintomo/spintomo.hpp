#pragma once

#include "spintomo/core.hpp"
#include "spintomo/geometry.hpp"
#include "spintomo/harmonic_filter.hpp"
#include "spintomo/harmonics.hpp"
#include "spintomo/io.hpp"
#include "spintomo/legendre.hpp"
#include "spintomo/linear_map.hpp"
#include "spintomo/microlocal.hpp"
#include "spintomo/operators.hpp"
#include "spintomo/phantoms.hpp"
#include "spintomo/sinogram.hpp"
#include "spintomo/solvers.hpp"
#include "spintomo/sphere_grid.hpp"
#include "spintomo/volume.hpp"
