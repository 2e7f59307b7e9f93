#pragma once

#include "fracgraph/errors.hpp"
#include "fracgraph/numeric.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/spectral.hpp"
#include "fracgraph/operators.hpp"
#include "fracgraph/flow.hpp"
#include "fracgraph/diagnostics.hpp"
#include "fracgraph/random.hpp"
