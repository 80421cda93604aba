#pragma once

#include "dcq/arith.hpp"
#include "dcq/catalog.hpp"
#include "dcq/conditional.hpp"
#include "dcq/discrete_measure.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/metrics.hpp"
#include "dcq/montecarlo.hpp"
#include "dcq/numeric.hpp"
#include "dcq/quantizer.hpp"
#include "dcq/reference.hpp"
#include "dcq/sampling.hpp"
#include "dcq/split_rule.hpp"
