#pragma once

#include "chern/error.hpp"
#include "chern/grid.hpp"
#include "chern/stencil.hpp"
#include "chern/geometry.hpp"
#include "chern/linsolve.hpp"
#include "chern/monotone.hpp"
#include "chern/barriers.hpp"
#include "chern/diagnostics.hpp"
#include "chern/scenarios.hpp"
#include "chern/field_io.hpp"
