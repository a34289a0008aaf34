#pragma once

#include "fiberatlas/example5/claims.hpp"
#include "fiberatlas/example5/model.hpp"
