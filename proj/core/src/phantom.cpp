#include "cspat/phantom.hpp"

#include "cspat/error.hpp"
#include "cspat/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cspat {

namespace {

void mask_to_support(SourceImage& img, const DetectorGeometry& geometry) {
    const Grid2D& g = img.grid();
    const double limit = kSupportFraction * geometry.radius();
    const Point2 c = geometry.center();
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
            if (std::hypot(g.x(ix) - c.x, g.y(iy) - c.y) > limit) img(ix, iy) = 0.0;
        }
    }
}

} // namespace

SourceImage make_cross_phantom(const Grid2D& grid, const DetectorGeometry& geometry) {
    geometry.validate_disc_within(grid);
    const double r = geometry.radius();
    const Point2 c = geometry.center();
    const double arm = 0.55 * r;
    const double half_width = 0.12 * r;
    const Point2 bump_center{c.x - 0.42 * r, c.y - 0.42 * r};
    const double bump_radius = 0.25 * r;

    SourceImage img(grid);
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
        for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
            const double dx = grid.x(ix) - c.x;
            const double dy = grid.y(iy) - c.y;
            double v = 0.0;
            if (std::abs(dx) <= arm && std::abs(dy) <= half_width) v += 0.5;
            if (std::abs(dx) <= half_width && std::abs(dy) <= arm) v += 0.5;
            const double rho = std::hypot(grid.x(ix) - bump_center.x, grid.y(iy) - bump_center.y);
            if (rho < bump_radius) {
                const double s = std::cos(0.5 * std::numbers::pi * rho / bump_radius);
                v += 0.4 * s * s;
            }
            img(ix, iy) = v;
        }
    }
    mask_to_support(img, geometry);
    return img;
}

SourceImage make_gaussian_phantom(const Grid2D& grid, const DetectorGeometry& geometry, Point2 center,
                                  double width) {
    if (!(width > 0.0)) throw ConfigError("gaussian width must be positive");
    SourceImage img(grid);
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
        for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
            const double dx = grid.x(ix) - center.x;
            const double dy = grid.y(iy) - center.y;
            img(ix, iy) = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        }
    }
    mask_to_support(img, geometry);
    return img;
}

SourceImage load_image_phantom(const std::filesystem::path& path, const Grid2D& grid,
                               const std::optional<DetectorGeometry>& geometry) {
    const io::GrayImage pgm = io::read_pgm(path);
    const double scale = 1.0 / static_cast<double>(pgm.maxval);
    auto pixel = [&](std::size_t col, std::size_t row) {
        return scale * static_cast<double>(pgm.pixels[row * pgm.width + col]);
    };
    // Fractional source coordinate for grid index i of n, aligning corners.
    auto source_coord = [](std::size_t i, std::size_t n, std::size_t extent) {
        if (extent == 1) return 0.0;
        return static_cast<double>(i) * static_cast<double>(extent - 1) / static_cast<double>(n - 1);
    };

    SourceImage img(grid);
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
        // Image row 0 is the top edge, i.e. the largest y.
        const double v = source_coord(grid.ny() - 1 - iy, grid.ny(), pgm.height);
        const auto r0 = static_cast<std::size_t>(std::floor(v));
        const std::size_t r1 = std::min(r0 + 1, pgm.height - 1);
        const double wy = v - static_cast<double>(r0);
        for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
            const double u = source_coord(ix, grid.nx(), pgm.width);
            const auto c0 = static_cast<std::size_t>(std::floor(u));
            const std::size_t c1 = std::min(c0 + 1, pgm.width - 1);
            const double wx = u - static_cast<double>(c0);
            img(ix, iy) = (1.0 - wy) * ((1.0 - wx) * pixel(c0, r0) + wx * pixel(c1, r0)) +
                          wy * ((1.0 - wx) * pixel(c0, r1) + wx * pixel(c1, r1));
        }
    }
    if (geometry) {
        geometry->validate_disc_within(grid);
        mask_to_support(img, *geometry);
    }
    return img;
}

} // namespace cspat
