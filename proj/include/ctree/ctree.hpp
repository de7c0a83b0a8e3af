#pragma once

#include "ctree/alarm.hpp"
#include "ctree/alarm_io.hpp"
#include "ctree/analysis.hpp"
#include "ctree/error.hpp"
#include "ctree/harness.hpp"
#include "ctree/oracle.hpp"
#include "ctree/rng.hpp"
#include "ctree/simulator.hpp"
#include "ctree/stats.hpp"
#include "ctree/tree.hpp"
#include "ctree/tree_io.hpp"
