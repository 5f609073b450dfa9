#pragma once

#include "kmrelay/analytic.hpp"
#include "kmrelay/common.hpp"
#include "kmrelay/experiments.hpp"
#include "kmrelay/fading.hpp"
#include "kmrelay/mathkern.hpp"
#include "kmrelay/quadrature.hpp"
#include "kmrelay/sysmodel.hpp"
#include "kmrelay/version.hpp"
