#pragma once

#include "invdens/error.hpp"
#include "invdens/estimators.hpp"
#include "invdens/harness.hpp"
#include "invdens/kernels.hpp"
#include "invdens/models.hpp"
#include "invdens/rates.hpp"
#include "invdens/rng.hpp"
#include "invdens/sampling.hpp"
#include "invdens/simulate.hpp"
