#pragma once

// Band-restricted permanent counting and sequential importance sampling.
//
// Umbrella header: pulls in the whole library.

#include "bandsis/analysis.hpp"
#include "bandsis/chain.hpp"
#include "bandsis/common.hpp"
#include "bandsis/correlation.hpp"
#include "bandsis/counting.hpp"
#include "bandsis/coupling.hpp"
#include "bandsis/graph.hpp"
#include "bandsis/numeric.hpp"
#include "bandsis/optprob.hpp"
#include "bandsis/parallel.hpp"
#include "bandsis/rng.hpp"
#include "bandsis/sampler.hpp"
#include "bandsis/state_space.hpp"
