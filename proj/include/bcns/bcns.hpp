#pragma once
// numerics plus the experiment layer (the latter needs nlohmann_json)
#include "bcns/cns.hpp"
#include "bcns/data.hpp"
#include "bcns/diagnostics.hpp"
#include "bcns/field_io.hpp"
#include "bcns/linear_pde.hpp"
#include "bcns/littlewood_paley.hpp"
#include "bcns/operators.hpp"
#include "bcns/picard.hpp"
#include "bcns/scenarios.hpp"
#include "bcns/spectral_core.hpp"
#include "bcns/timeseries.hpp"
