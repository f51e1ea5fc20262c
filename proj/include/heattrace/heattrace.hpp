#pragma once

#include "errors.hpp"
#include "parallel.hpp"
#include "quad.hpp"
#include "special_fns.hpp"
#include "sector_models.hpp"
#include "corner_lab.hpp"
#include "trace_coeffs.hpp"
#include "exact_spectra.hpp"
#include "domains.hpp"
#include "spec_io.hpp"
