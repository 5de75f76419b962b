#pragma once

// Umbrella header: estimation and asymptotically exact inference for cluster
// randomized experiments under covariate-adaptive stratified randomization,
// with a replication engine and brute-force oracles for small instances.

#include "crt/adjust.hpp"
#include "crt/core.hpp"
#include "crt/dgp.hpp"
#include "crt/errors.hpp"
#include "crt/estimators.hpp"
#include "crt/inference.hpp"
#include "crt/montecarlo.hpp"
#include "crt/numeric.hpp"
#include "crt/oracle.hpp"
#include "crt/randomization.hpp"
#include "crt/rng.hpp"
#include "crt/variance.hpp"
