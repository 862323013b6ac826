#pragma once

#include "ewpitman/numerics.hpp"
#include "ewpitman/random.hpp"
#include "ewpitman/sibuya.hpp"
#include "ewpitman/sampler.hpp"
#include "ewpitman/statistics.hpp"
#include "ewpitman/martingale.hpp"
#include "ewpitman/covariance.hpp"
#include "ewpitman/exact_moments.hpp"
#include "ewpitman/oracle.hpp"
#include "ewpitman/montecarlo.hpp"
#include "ewpitman/io.hpp"
