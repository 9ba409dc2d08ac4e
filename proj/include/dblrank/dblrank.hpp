// Umbrella header.
#pragma once

#include "dblrank/core.hpp"
#include "dblrank/distkit.hpp"
#include "dblrank/doublerank.hpp"
#include "dblrank/fitkit.hpp"
#include "dblrank/indicators.hpp"
#include "dblrank/io.hpp"
#include "dblrank/runner.hpp"
#include "dblrank/synthgen.hpp"
