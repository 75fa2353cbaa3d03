#pragma once

#include "error.hpp"
#include "experiments.hpp"
#include "maxsliced.hpp"
#include "measure_io.hpp"
#include "measures.hpp"
#include "ot1d.hpp"
#include "ot_exact.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sliced.hpp"
#include "sphere.hpp"
