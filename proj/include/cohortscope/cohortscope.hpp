#pragma once

// Umbrella header. http.hpp is left out so library users do not pull in
// the HTTP dependency unless they ask for it.

#include "cohortscope/core.hpp"
#include "cohortscope/ingest.hpp"
#include "cohortscope/microenv.hpp"
#include "cohortscope/neighborhood.hpp"
#include "cohortscope/outlier.hpp"
#include "cohortscope/query.hpp"
#include "cohortscope/report.hpp"
#include "cohortscope/serialize.hpp"
#include "cohortscope/server.hpp"
#include "cohortscope/stats.hpp"
#include "cohortscope/synth.hpp"
