#pragma once

// Umbrella include.

#include "qsl/bounds.hpp"
#include "qsl/core.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "qsl/optimize.hpp"
#include "qsl/serialize.hpp"
#include "qsl/tolerances.hpp"
#include "qsl/verify.hpp"
#include "qsl/version.hpp"
