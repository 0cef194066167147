#pragma once

#include "edudyn/analysis.hpp"
#include "edudyn/config.hpp"
#include "edudyn/csv.hpp"
#include "edudyn/errors.hpp"
#include "edudyn/map1d.hpp"
#include "edudyn/map2d.hpp"
#include "edudyn/model.hpp"
#include "edudyn/params.hpp"
#include "edudyn/run.hpp"
