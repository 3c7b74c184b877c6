#pragma once

#include "dyngal/adapt.hpp"
#include "dyngal/basis.hpp"
#include "dyngal/experiment.hpp"
#include "dyngal/galerkin.hpp"
#include "dyngal/io.hpp"
#include "dyngal/marking.hpp"
#include "dyngal/multi_index.hpp"
#include "dyngal/operator.hpp"
#include "dyngal/quadrature.hpp"
#include "dyngal/sparsity.hpp"
