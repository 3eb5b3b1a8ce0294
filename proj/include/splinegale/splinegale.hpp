#pragma once

#include "splinegale/adapted.hpp"
#include "splinegale/banded.hpp"
#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/g_construction.hpp"
#include "splinegale/harness.hpp"
#include "splinegale/interval.hpp"
#include "splinegale/kernel_ops.hpp"
#include "splinegale/martingale.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/polynomial.hpp"
#include "splinegale/projection.hpp"
#include "splinegale/quadrature.hpp"
#include "splinegale/random.hpp"
#include "splinegale/serialization.hpp"
