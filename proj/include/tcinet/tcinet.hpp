#pragma once

#include "tcinet/adjacency.hpp"
#include "tcinet/epidemic.hpp"
#include "tcinet/errors.hpp"
#include "tcinet/experiment.hpp"
#include "tcinet/inference.hpp"
#include "tcinet/likelihood.hpp"
#include "tcinet/master_equation.hpp"
#include "tcinet/random.hpp"
#include "tcinet/report.hpp"
#include "tcinet/trajectory.hpp"
#include "tcinet/tt_cross.hpp"
