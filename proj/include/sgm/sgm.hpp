#pragma once

// Stratified graphical models over binary variables: chordal-graph
// machinery, context-specific independence restrictions, the cyclical
// projection maximum likelihood estimator, BIC scoring and
// Metropolis-Hastings structure search.

#include "sgm/bits.hpp"
#include "sgm/dataset.hpp"
#include "sgm/error.hpp"
#include "sgm/graph.hpp"
#include "sgm/io.hpp"
#include "sgm/loglinear.hpp"
#include "sgm/projection.hpp"
#include "sgm/rng.hpp"
#include "sgm/scoring.hpp"
#include "sgm/search.hpp"
#include "sgm/stratified.hpp"
#include "sgm/table.hpp"
