#pragma once

#include "fiberatlas/arc.hpp"
#include "fiberatlas/arcscan/loops.hpp"
#include "fiberatlas/arcscan/scan.hpp"
#include "fiberatlas/arcscan/verdict.hpp"
