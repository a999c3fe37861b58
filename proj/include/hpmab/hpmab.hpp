#pragma once

#include "hpmab/bayes.hpp"
#include "hpmab/environment.hpp"
#include "hpmab/experiment.hpp"
#include "hpmab/hawkes.hpp"
#include "hpmab/io.hpp"
#include "hpmab/metrics.hpp"
#include "hpmab/policies.hpp"
#include "hpmab/random.hpp"
#include "hpmab/spatial.hpp"
#include "hpmab/tracker.hpp"
