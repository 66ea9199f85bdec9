#pragma once

#include "analytic.hpp"
#include "config.hpp"
#include "critical_rate.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "order_stats.hpp"
#include "rng.hpp"
#include "simulator.hpp"
#include "stats.hpp"
#include "sweep.hpp"
#include "version.hpp"
