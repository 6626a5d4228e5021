#pragma once

#include "kq/config.hpp"
#include "kq/errors.hpp"
#include "kq/finite_diff.hpp"
#include "kq/linalg.hpp"
#include "kq/potential.hpp"
#include "kq/quadrature.hpp"
#include "kq/quantize.hpp"
#include "kq/studies.hpp"
#include "kq/symspace.hpp"
#include "kq/toric.hpp"
