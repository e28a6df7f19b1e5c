#pragma once

#include "sdicov/bench.hpp"
#include "sdicov/dense_reference.hpp"
#include "sdicov/error.hpp"
#include "sdicov/line_search.hpp"
#include "sdicov/objective.hpp"
#include "sdicov/optimizers.hpp"
#include "sdicov/problems.hpp"
#include "sdicov/quadratic_lab.hpp"
#include "sdicov/rng.hpp"
#include "sdicov/transform.hpp"
#include "sdicov/types.hpp"
