#pragma once

// Everything, for tools and tests that want the whole library.
#include "stoilow/branch.hpp"
#include "stoilow/error.hpp"
#include "stoilow/factor.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/grid.hpp"
#include "stoilow/lifting.hpp"
#include "stoilow/normal.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region.hpp"
#include "stoilow/region_image.hpp"
#include "stoilow/regularity.hpp"
#include "stoilow/scenario.hpp"
#include "stoilow/winding.hpp"
#include "stoilow/zoo.hpp"
