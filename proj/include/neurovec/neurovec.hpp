#pragma once

#include "neurovec/cost.hpp"
#include "neurovec/csv.hpp"
#include "neurovec/dataset.hpp"
#include "neurovec/error.hpp"
#include "neurovec/evaluate.hpp"
#include "neurovec/metrics.hpp"
#include "neurovec/model.hpp"
#include "neurovec/report.hpp"
#include "neurovec/rng.hpp"
#include "neurovec/store.hpp"
#include "neurovec/token.hpp"
#include "neurovec/train.hpp"
#include "neurovec/value.hpp"
