#pragma once

#include "softpd/algorithms.hpp"
#include "softpd/common.hpp"
#include "softpd/eval.hpp"
#include "softpd/formulations.hpp"
#include "softpd/free_sites.hpp"
#include "softpd/geometry.hpp"
#include "softpd/io.hpp"
#include "softpd/lp.hpp"
#include "softpd/mps.hpp"
#include "softpd/svg.hpp"
