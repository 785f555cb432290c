#pragma once

// Umbrella header for the adaptive voxel-pyramid toolkit.

#include "voxpyr/complexity.hpp"
#include "voxpyr/evaluation.hpp"
#include "voxpyr/fixtures.hpp"
#include "voxpyr/io.hpp"
#include "voxpyr/normals.hpp"
#include "voxpyr/point_cloud.hpp"
#include "voxpyr/pyramid.hpp"
#include "voxpyr/tap_lme.hpp"
#include "voxpyr/voxel_grid.hpp"
