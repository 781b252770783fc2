#pragma once

#include "aoi/bounds.hpp"
#include "aoi/config.hpp"
#include "aoi/core_model.hpp"
#include "aoi/dp_oracle.hpp"
#include "aoi/policies.hpp"
#include "aoi/rng.hpp"
#include "aoi/sim_harness.hpp"
