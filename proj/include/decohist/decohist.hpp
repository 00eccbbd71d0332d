#pragma once

#include "decohist/core.hpp"
#include "decohist/errors.hpp"
#include "decohist/free_particle.hpp"
#include "decohist/histories.hpp"
#include "decohist/moments.hpp"
#include "decohist/oracle.hpp"
#include "decohist/oscillator.hpp"
#include "decohist/output.hpp"
#include "decohist/scenario.hpp"
#include "decohist/specfun.hpp"
#include "decohist/sweep.hpp"
#include "decohist/system.hpp"
