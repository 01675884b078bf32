#pragma once

#include <cmath>

// Absolute-tolerance comparison; doctest's Approx is relative-only.
#define CHECK_CLOSE(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))
#define REQUIRE_CLOSE(a, b, tol) REQUIRE(std::abs((a) - (b)) <= (tol))
