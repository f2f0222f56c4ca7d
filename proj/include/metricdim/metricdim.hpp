#pragma once

#include "metricdim/amplifier.hpp"
#include "metricdim/constructors.hpp"
#include "metricdim/dyadic.hpp"
#include "metricdim/errors.hpp"
#include "metricdim/estimators.hpp"
#include "metricdim/harness.hpp"
#include "metricdim/io.hpp"
#include "metricdim/packing.hpp"
#include "metricdim/parallel.hpp"
#include "metricdim/partition.hpp"
#include "metricdim/point_set.hpp"
#include "metricdim/random.hpp"
#include "metricdim/recipe.hpp"
#include "metricdim/scaling.hpp"
#include "metricdim/serialize.hpp"
#include "metricdim/sparse.hpp"
