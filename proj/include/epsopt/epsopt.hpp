// epsopt.hpp - umbrella header.
#pragma once

#include "epsopt/allocate.hpp"
#include "epsopt/binomial.hpp"
#include "epsopt/bounds.hpp"
#include "epsopt/core.hpp"
#include "epsopt/exact.hpp"
#include "epsopt/golden.hpp"
#include "epsopt/mcsim.hpp"
#include "epsopt/normal.hpp"
#include "epsopt/rng.hpp"
#include "epsopt/tables.hpp"
