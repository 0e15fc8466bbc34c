#pragma once

// Umbrella header for the pwl library.

#include "pwl/codegen.hpp"
#include "pwl/condense.hpp"
#include "pwl/csv.hpp"
#include "pwl/curve.hpp"
#include "pwl/distill.hpp"
#include "pwl/error.hpp"
#include "pwl/fitter.hpp"
#include "pwl/model.hpp"
#include "pwl/model_json.hpp"
#include "pwl/point.hpp"
#include "pwl/solver.hpp"
#include "pwl/transform.hpp"
