#pragma once

// Covariate-assisted spectral clustering: umbrella header.

#include "casc/cluster.hpp"
#include "casc/covariates.hpp"
#include "casc/eigensolve.hpp"
#include "casc/graph.hpp"
#include "casc/io.hpp"
#include "casc/kmeans.hpp"
#include "casc/metrics.hpp"
#include "casc/ncsbm.hpp"
#include "casc/operators.hpp"
#include "casc/sweep.hpp"
#include "casc/theory.hpp"
#include "casc/tune.hpp"
#include "casc/version.hpp"
