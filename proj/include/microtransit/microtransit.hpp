#pragma once

#include "assignment.hpp"
#include "calibration.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "demand.hpp"
#include "dispatch.hpp"
#include "driver.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "event_log.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "random.hpp"
#include "rebalance.hpp"
#include "routing.hpp"
#include "scenario.hpp"
#include "zone_io.hpp"
