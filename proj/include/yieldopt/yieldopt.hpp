#pragma once

// Umbrella header.

#include "yieldopt/config.hpp"
#include "yieldopt/errors.hpp"
#include "yieldopt/estimator.hpp"
#include "yieldopt/experiments.hpp"
#include "yieldopt/gpr.hpp"
#include "yieldopt/hybrid.hpp"
#include "yieldopt/model.hpp"
#include "yieldopt/moo.hpp"
#include "yieldopt/newton.hpp"
#include "yieldopt/uq.hpp"
