#pragma once

#include "fiberatlas/topo/loop.hpp"
#include "fiberatlas/topo/rips.hpp"
#include "fiberatlas/topo/summary.hpp"
