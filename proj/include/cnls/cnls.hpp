#pragma once

// Umbrella header: the whole solver in one include.

#include "cnls/grid.hpp"
#include "cnls/field.hpp"
#include "cnls/solitons.hpp"
#include "cnls/sylvester.hpp"
#include "cnls/assembly.hpp"
#include "cnls/integrator.hpp"
#include "cnls/io.hpp"
#include "cnls/harness.hpp"
