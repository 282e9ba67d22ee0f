#pragma once

// Simulation library for mean estimation with a phased search unitary:
// finite probability spaces, the p-weighted state space and its two-part
// unitary, exact spectral analysis, kernel-exact phase-estimation sampling,
// the distinguishing routines, and the classical reduction ladder ending in
// an estimator with error stddev/n from O(n) oracle uses.

#include "qmean/apps.hpp"
#include "qmean/estimate.hpp"
#include "qmean/instances.hpp"
#include "qmean/io.hpp"
#include "qmean/ledger.hpp"
#include "qmean/maintask.hpp"
#include "qmean/measure.hpp"
#include "qmean/numeric.hpp"
#include "qmean/parallel.hpp"
#include "qmean/prob.hpp"
#include "qmean/rng.hpp"
#include "qmean/spectral.hpp"
#include "qmean/state.hpp"
#include "qmean/verify.hpp"
