#pragma once

// Yule-Walker estimation for autoregressive processes, order selection by
// information criteria and max-statistic estimators, simultaneous
// confidence bands, and a reproducible Monte Carlo experiment harness.

#include "arband/ar_model.hpp"
#include "arband/bands.hpp"
#include "arband/errors.hpp"
#include "arband/estimation.hpp"
#include "arband/harness.hpp"
#include "arband/io.hpp"
#include "arband/selection.hpp"
#include "arband/special.hpp"
#include "arband/version.hpp"
