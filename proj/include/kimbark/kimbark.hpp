#pragma once

// Umbrella header: the whole library in dependency order.

#include "kimbark/errors.hpp"
#include "kimbark/case.hpp"
#include "kimbark/network.hpp"
#include "kimbark/dynamics.hpp"
#include "kimbark/equal_area.hpp"
#include "kimbark/assessment.hpp"
#include "kimbark/io.hpp"
