#pragma once

#include "fiberatlas/polycore/parser.hpp"
#include "fiberatlas/polycore/polynomial.hpp"
#include "fiberatlas/polycore/rational.hpp"
#include "fiberatlas/polycore/serialize.hpp"
#include "fiberatlas/polycore/univariate.hpp"
