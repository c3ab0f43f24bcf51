#pragma once

#include "bq_operator.hpp"
#include "integrate.hpp"
#include "piecewise_linear.hpp"
#include "qseries.hpp"
#include "quadrature.hpp"
#include "truncation.hpp"
