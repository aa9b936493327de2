#pragma once

// Umbrella header for the freerel library.

#include "freerel/error.hpp"
#include "freerel/eval.hpp"
#include "freerel/expr.hpp"
#include "freerel/field.hpp"
#include "freerel/linalg.hpp"
#include "freerel/poly_matrix.hpp"
#include "freerel/polynomial.hpp"
#include "freerel/quiver.hpp"
#include "freerel/report.hpp"
#include "freerel/rng.hpp"
#include "freerel/sigma.hpp"
#include "freerel/words.hpp"
