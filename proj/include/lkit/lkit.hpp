#pragma once

#include "lkit/csv.hpp"
#include "lkit/expression.hpp"
#include "lkit/feature_sets.hpp"
#include "lkit/pipeline.hpp"
#include "lkit/problems.hpp"
#include "lkit/sampling.hpp"
#include "lkit/vizdata.hpp"
