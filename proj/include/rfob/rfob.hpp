#pragma once

#include "rfob/plant.hpp"
#include "rfob/observers.hpp"
#include "rfob/polynomial.hpp"
#include "rfob/cubic.hpp"
#include "rfob/loop_model.hpp"
#include "rfob/design.hpp"
#include "rfob/identify.hpp"
#include "rfob/engine.hpp"
#include "rfob/csv.hpp"
#include "rfob/config.hpp"
