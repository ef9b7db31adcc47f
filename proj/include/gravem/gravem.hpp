// Umbrella header.
#pragma once

#include "gravem/config.hpp"
#include "gravem/emulation.hpp"
#include "gravem/equivalence.hpp"
#include "gravem/errors.hpp"
#include "gravem/geodesic.hpp"
#include "gravem/linalg.hpp"
#include "gravem/metric.hpp"
#include "gravem/runner.hpp"
#include "gravem/scenario.hpp"
#include "gravem/wave_algebra.hpp"
