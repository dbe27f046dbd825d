#pragma once

// Everything at once.

#include "qortho/error.hpp"
#include "qortho/rational.hpp"
#include "qortho/polynomial.hpp"
#include "qortho/qcore.hpp"
#include "qortho/polyfam.hpp"
#include "qortho/densities.hpp"
#include "qortho/quadrature.hpp"
#include "qortho/connect.hpp"
#include "qortho/report.hpp"
#include "qortho/expand.hpp"
#include "qortho/verify.hpp"
#include "qortho/sampler.hpp"
