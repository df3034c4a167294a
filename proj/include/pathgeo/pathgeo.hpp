#ifndef PATHGEO_PATHGEO_HPP
#define PATHGEO_PATHGEO_HPP

#include "pathgeo/core.hpp"
#include "pathgeo/manifold.hpp"
#include "pathgeo/path.hpp"
#include "pathgeo/parallel.hpp"
#include "pathgeo/pathspace.hpp"
#include "pathgeo/backtrack.hpp"
#include "pathgeo/category.hpp"
#include "pathgeo/generators.hpp"
#include "pathgeo/io.hpp"
#include "pathgeo/scenario.hpp"
#include "pathgeo/random.hpp"
#include "pathgeo/checks.hpp"

#endif // PATHGEO_PATHGEO_HPP
