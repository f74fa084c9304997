#pragma once

#include "secantlink/core.hpp"
#include "secantlink/curve.hpp"
#include "secantlink/geometry.hpp"
#include "secantlink/linking.hpp"
#include "secantlink/numerics.hpp"
#include "secantlink/transversal.hpp"
#include "secantlink/weights.hpp"
#include "secantlink/circles.hpp"
#include "secantlink/secant_surface.hpp"
#include "secantlink/fixtures.hpp"
#include "secantlink/io.hpp"
