#pragma once

// Umbrella header.

#include "community.hpp"
#include "csv.hpp"
#include "date.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "ideology.hpp"
#include "info_metrics.hpp"
#include "io.hpp"
#include "jackknife.hpp"
#include "modularity.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "structure.hpp"
#include "temporal.hpp"
#include "topics.hpp"
#include "report.hpp"
#include "fixture.hpp"
#include "commands.hpp"
