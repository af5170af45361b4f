#pragma once

#include "asymptotics.hpp"
#include "bounds.hpp"
#include "energy.hpp"
#include "field.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "params.hpp"
#include "reference.hpp"
#include "solver.hpp"
#include "symbol.hpp"
