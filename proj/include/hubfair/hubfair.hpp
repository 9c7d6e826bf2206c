#pragma once

#include "hubfair/dates.hpp"
#include "hubfair/design.hpp"
#include "hubfair/diagnostics.hpp"
#include "hubfair/error.hpp"
#include "hubfair/fairness.hpp"
#include "hubfair/glm.hpp"
#include "hubfair/ingest.hpp"
#include "hubfair/metrics.hpp"
#include "hubfair/phases.hpp"
#include "hubfair/stats.hpp"
#include "hubfair/synth.hpp"
#include "hubfair/text.hpp"
