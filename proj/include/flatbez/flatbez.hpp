#pragma once

#include "flatbez/bezier.hpp"
#include "flatbez/config.hpp"
#include "flatbez/constraints.hpp"
#include "flatbez/envelope.hpp"
#include "flatbez/fixture.hpp"
#include "flatbez/flat_models.hpp"
#include "flatbez/interval.hpp"
#include "flatbez/io.hpp"
#include "flatbez/poly.hpp"
#include "flatbez/region.hpp"
#include "flatbez/simulate.hpp"
