#pragma once

#include "spherejack/errors.hpp"
#include "spherejack/experiment.hpp"
#include "spherejack/kernel.hpp"
#include "spherejack/oracle.hpp"
#include "spherejack/quadrature.hpp"
#include "spherejack/rate.hpp"
#include "spherejack/specfun.hpp"
#include "spherejack/zonal.hpp"
