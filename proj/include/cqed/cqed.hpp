// Umbrella header.

#pragma once

#include "cqed/correlations.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/harness.hpp"
#include "cqed/hilbert.hpp"
#include "cqed/models.hpp"
