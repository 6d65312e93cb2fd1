#pragma once

#include "opdiff/config.hpp"
#include "opdiff/diagnostics.hpp"
#include "opdiff/error.hpp"
#include "opdiff/harness.hpp"
#include "opdiff/krylov.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"
#include "opdiff/operators.hpp"
#include "opdiff/oracle.hpp"
#include "opdiff/plate.hpp"
#include "opdiff/stability.hpp"
#include "opdiff/steppers.hpp"
