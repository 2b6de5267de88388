#pragma once

#include "dmed/arm_models.hpp"
#include "dmed/deviation_bounds.hpp"
#include "dmed/divergence.hpp"
#include "dmed/empirical_dist.hpp"
#include "dmed/errors.hpp"
#include "dmed/policies.hpp"
#include "dmed/simulation.hpp"
