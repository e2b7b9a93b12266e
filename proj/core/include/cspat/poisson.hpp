#pragma once

#include "cspat/image.hpp"

namespace cspat {

// Solves discrete_laplacian(f) = g (Dirichlet, zero outside the grid) by
// diagonalising the 5-point operator with type-I discrete sine transforms.
SourceImage poisson_solve(const SourceImage& g);

} // namespace cspat
