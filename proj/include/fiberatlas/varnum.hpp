#pragma once

#include "fiberatlas/varnum/certify.hpp"
#include "fiberatlas/varnum/compiled.hpp"
#include "fiberatlas/varnum/critical.hpp"
#include "fiberatlas/varnum/milnor.hpp"
#include "fiberatlas/varnum/parallel.hpp"
#include "fiberatlas/varnum/projection.hpp"
#include "fiberatlas/varnum/random.hpp"
#include "fiberatlas/varnum/sampling.hpp"
