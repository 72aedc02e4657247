#pragma once

#include "wof/bessel.hpp"
#include "wof/config.hpp"
#include "wof/csv.hpp"
#include "wof/engine.hpp"
#include "wof/error.hpp"
#include "wof/feedforward.hpp"
#include "wof/montecarlo.hpp"
#include "wof/nelder_mead.hpp"
#include "wof/noise.hpp"
#include "wof/parallel.hpp"
#include "wof/phase_space.hpp"
#include "wof/photostatistics.hpp"
#include "wof/quadrature.hpp"
#include "wof/random.hpp"
#include "wof/thermal_quadrature.hpp"
#include "wof/thermo.hpp"
