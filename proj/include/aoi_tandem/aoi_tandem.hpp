#pragma once

#include "aoi_tandem/analysis.hpp"
#include "aoi_tandem/csv.hpp"
#include "aoi_tandem/des.hpp"
#include "aoi_tandem/errors.hpp"
#include "aoi_tandem/quadrature.hpp"
#include "aoi_tandem/rng.hpp"
#include "aoi_tandem/scenario.hpp"
#include "aoi_tandem/scenario_json.hpp"
#include "aoi_tandem/sweep.hpp"
