#pragma once

#include "stabledecomp/core.hpp"
#include "stabledecomp/decompose.hpp"
#include "stabledecomp/maxstable.hpp"
#include "stabledecomp/simulate.hpp"
#include "stabledecomp/stationary.hpp"
