#pragma once

#include "analysis.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "hodge.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "power_maps.hpp"
#include "sim.hpp"
#include "statespace.hpp"
#include "whitney.hpp"
