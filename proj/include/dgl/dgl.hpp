#pragma once

#include "dgl/errors.hpp"
#include "dgl/lattice.hpp"
#include "dgl/dopri.hpp"
#include "dgl/integrator.hpp"
#include "dgl/regimes.hpp"
#include "dgl/parallel.hpp"
#include "dgl/experiments.hpp"
#include "dgl/identities.hpp"
#include "dgl/config.hpp"
#include "dgl/report.hpp"
#include "dgl/run.hpp"
