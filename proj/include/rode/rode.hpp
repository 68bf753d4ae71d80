#pragma once

#include "rode/error.hpp"
#include "rode/parallel.hpp"
#include "rode/integrate.hpp"
#include "rode/distributions.hpp"
#include "rode/quadrature.hpp"
#include "rode/kl.hpp"
#include "rode/solution.hpp"
#include "rode/density.hpp"
#include "rode/verify.hpp"
#include "rode/examples.hpp"
#include "rode/io.hpp"
#include "rode/run.hpp"
