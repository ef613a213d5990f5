#pragma once

#include "weylfold/common.hpp"
#include "weylfold/density.hpp"
#include "weylfold/folding.hpp"
#include "weylfold/lattice.hpp"
#include "weylfold/parallel.hpp"
#include "weylfold/rng.hpp"
#include "weylfold/rootsys.hpp"
#include "weylfold/stats.hpp"
#include "weylfold/stochastic.hpp"
#include "weylfold/version.hpp"
