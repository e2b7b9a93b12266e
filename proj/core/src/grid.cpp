#include "cspat/grid.hpp"

#include "cspat/error.hpp"

#include <cmath>
#include <string>

namespace cspat {

Grid2D::Grid2D(std::size_t nx, std::size_t ny, double spacing, Point2 origin)
    : nx_(nx), ny_(ny), spacing_(spacing), origin_(origin) {
    if (nx < 3 || ny < 3) {
        throw ConfigError("grid must be at least 3x3, got " + std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw ConfigError("grid spacing must be positive, got " + std::to_string(spacing));
    }
}

Grid2D Grid2D::centered(std::size_t nx, std::size_t ny, double spacing) {
    const double ox = -0.5 * spacing * static_cast<double>(nx > 0 ? nx - 1 : 0);
    const double oy = -0.5 * spacing * static_cast<double>(ny > 0 ? ny - 1 : 0);
    return Grid2D(nx, ny, spacing, {ox, oy});
}

Point2 Grid2D::center() const {
    return {0.5 * (x(0) + x_max()), 0.5 * (y(0) + y_max())};
}

bool Grid2D::contains(Point2 p) const {
    return p.x >= x(0) && p.x <= x_max() && p.y >= y(0) && p.y <= y_max();
}

TimeAxis::TimeAxis(std::size_t num_samples, double t_max) : num_samples_(num_samples), t_max_(t_max) {
    if (num_samples < 3) {
        throw ConfigError("time axis needs at least 3 samples, got " + std::to_string(num_samples));
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw ConfigError("time axis duration must be positive");
    }
}

DetectorGeometry::DetectorGeometry(Point2 center, double radius, std::size_t num_sensors,
                                   double angular_coverage, double start_angle)
    : center_(center), radius_(radius), coverage_(angular_coverage), start_angle_(start_angle) {
    if (num_sensors < 1) {
        throw ConfigError("detector geometry needs at least one sensor");
    }
    if (!(radius > 0.0)) {
        throw ConfigError("detector radius must be positive");
    }
    if (!(angular_coverage > 0.0)) {
        throw ConfigError("angular coverage must be positive");
    }
    positions_.reserve(num_sensors);
    const double n = static_cast<double>(num_sensors);
    for (std::size_t i = 0; i < num_sensors; ++i) {
        double theta = 0.0;
        if (full_circle()) {
            theta = start_angle + 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        } else if (num_sensors == 1) {
            theta = start_angle + 0.5 * angular_coverage;
        } else {
            theta = start_angle + angular_coverage * static_cast<double>(i) / (n - 1.0);
        }
        positions_.push_back({center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)});
    }
}

bool DetectorGeometry::full_circle() const {
    return coverage_ >= 2.0 * std::numbers::pi - 1e-12;
}

double DetectorGeometry::arc_weight() const {
    const double n = static_cast<double>(num_sensors());
    if (full_circle()) {
        return 2.0 * std::numbers::pi * radius_ / n;
    }
    return coverage_ * radius_ / n;
}

void DetectorGeometry::validate_within(const Grid2D& grid) const {
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (!grid.contains(positions_[i])) {
            throw ConfigError("sensor " + std::to_string(i) + " lies outside the grid");
        }
    }
}

void DetectorGeometry::validate_disc_within(const Grid2D& grid) const {
    if (center_.x - radius_ < grid.x(0) || center_.x + radius_ > grid.x_max() ||
        center_.y - radius_ < grid.y(0) || center_.y + radius_ > grid.y_max()) {
        throw ConfigError("detection disc of radius " + std::to_string(radius_) +
                          " does not fit inside the grid");
    }
}

} // namespace cspat
