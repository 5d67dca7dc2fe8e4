#pragma once

// Umbrella header.

#include "trigopt/assemble.hpp"
#include "trigopt/driver.hpp"
#include "trigopt/dubins.hpp"
#include "trigopt/fbbt.hpp"
#include "trigopt/mdppp.hpp"
#include "trigopt/milp/lp_format.hpp"
#include "trigopt/milp/model.hpp"
#include "trigopt/milp/simplex.hpp"
#include "trigopt/milp/solve.hpp"
#include "trigopt/milp/solver.hpp"
#include "trigopt/model.hpp"
#include "trigopt/model_json.hpp"
#include "trigopt/partition.hpp"
#include "trigopt/principal_domain.hpp"
#include "trigopt/refinement.hpp"
