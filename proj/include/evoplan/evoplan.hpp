#pragma once

// Umbrella header for the edge-cloud inference planning library.

#include "evoplan/allocator.hpp"
#include "evoplan/data_stream.hpp"
#include "evoplan/errors.hpp"
#include "evoplan/oracle.hpp"
#include "evoplan/pr_metrics.hpp"
#include "evoplan/response_models.hpp"
#include "evoplan/scenario.hpp"
#include "evoplan/scenario_io.hpp"
#include "evoplan/sweep.hpp"
