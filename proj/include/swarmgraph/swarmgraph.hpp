#pragma once

// Umbrella header: language agents as optimizable computational graphs.

#include "swarmgraph/agents.hpp"
#include "swarmgraph/edge_distribution.hpp"
#include "swarmgraph/errors.hpp"
#include "swarmgraph/executors.hpp"
#include "swarmgraph/experiment.hpp"
#include "swarmgraph/graph.hpp"
#include "swarmgraph/http_executor.hpp"
#include "swarmgraph/node_opt.hpp"
#include "swarmgraph/reinforce.hpp"
#include "swarmgraph/serialization.hpp"
#include "swarmgraph/tasks.hpp"
#include "swarmgraph/util.hpp"
