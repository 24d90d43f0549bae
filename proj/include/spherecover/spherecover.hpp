#pragma once

#include "spherecover/errors.hpp"
#include "spherecover/random.hpp"
#include "spherecover/sphere.hpp"
#include "spherecover/coverage.hpp"
#include "spherecover/oracles.hpp"
#include "spherecover/statistics.hpp"
#include "spherecover/experiments.hpp"
