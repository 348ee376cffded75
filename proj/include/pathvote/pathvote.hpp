#pragma once

// Umbrella header: noisy pairwise clustering via path majority votes.

#include "analysis.hpp"
#include "decision.hpp"
#include "harness.hpp"
#include "labeling.hpp"
#include "noise.hpp"
#include "oracle.hpp"
#include "path_builder.hpp"
#include "query_graph.hpp"
#include "rng.hpp"
