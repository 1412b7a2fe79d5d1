#pragma once

#include "xover/combinatorics.hpp"
#include "xover/config.hpp"
#include "xover/evt.hpp"
#include "xover/experiment.hpp"
#include "xover/polycost.hpp"
#include "xover/rng.hpp"
#include "xover/search.hpp"
#include "xover/stats.hpp"
#include "xover/svg.hpp"
