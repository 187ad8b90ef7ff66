// Convenience header pulling in the whole library.
#pragma once

#include "decim/baseline.hpp"
#include "decim/bench.hpp"
#include "decim/core.hpp"
#include "decim/decimate.hpp"
#include "decim/exec.hpp"
#include "decim/grid.hpp"
#include "decim/pcd_io.hpp"
#include "decim/rng.hpp"
#include "decim/synthetic.hpp"
