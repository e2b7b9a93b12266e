#pragma once

#include "cspat/grid.hpp"
#include "cspat/image.hpp"

#include <filesystem>
#include <optional>

namespace cspat {

// Fraction of the detection radius that bounds every phantom's support.
inline constexpr double kSupportFraction = 0.9;

// Cross made of two overlapping bars (levels 0.5 on the arms, 1.0 where they
// overlap) plus a separate cos^2 bump of height 0.4 in the lower-left
// quadrant. Everything outside kSupportFraction * R is zero.
SourceImage make_cross_phantom(const Grid2D& grid, const DetectorGeometry& geometry);

// Isotropic Gaussian exp(-|r - center|^2 / (2 width^2)), truncated to zero
// outside kSupportFraction * R.
SourceImage make_gaussian_phantom(const Grid2D& grid, const DetectorGeometry& geometry,
                                  Point2 center, double width);

// Reads an 8-bit PGM, scales by 1/maxval and resamples onto the grid with
// bilinear interpolation (image corners aligned with grid corners). When a
// geometry is given the result is masked to the support disc.
SourceImage load_image_phantom(const std::filesystem::path& path, const Grid2D& grid,
                               const std::optional<DetectorGeometry>& geometry = std::nullopt);

} // namespace cspat
