#pragma once

#include "brainstorm/bundle_io.hpp"
#include "brainstorm/calibration.hpp"
#include "brainstorm/consensus.hpp"
#include "brainstorm/core.hpp"
#include "brainstorm/csv.hpp"
#include "brainstorm/learners.hpp"
#include "brainstorm/pipeline.hpp"
#include "brainstorm/representations.hpp"
#include "brainstorm/rng.hpp"
#include "brainstorm/simulator.hpp"
