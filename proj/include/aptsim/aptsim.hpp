#pragma once

#include "aptsim/analytics.hpp"
#include "aptsim/cpt_bloch.hpp"
#include "aptsim/errors.hpp"
#include "aptsim/fit.hpp"
#include "aptsim/linalg.hpp"
#include "aptsim/model.hpp"
#include "aptsim/pulse.hpp"
#include "aptsim/virtual_lab.hpp"
