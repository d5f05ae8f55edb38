#pragma once

// Umbrella header for the LAGO toolkit.

#include "lago/align.hpp"
#include "lago/distance.hpp"
#include "lago/errors.hpp"
#include "lago/experiment.hpp"
#include "lago/graph.hpp"
#include "lago/io.hpp"
#include "lago/metrics.hpp"
#include "lago/noise.hpp"
#include "lago/oracle.hpp"
#include "lago/pdmm.hpp"
#include "lago/rng.hpp"
#include "lago/synth.hpp"
#include "lago/tv.hpp"
#include "lago/types.hpp"
