#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

namespace cspat {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

// Uniform 2-D node grid. Node (ix, iy) sits at origin + spacing * (ix, iy).
// Storage order everywhere is row-major with iy as the row.
class Grid2D {
public:
    Grid2D(std::size_t nx, std::size_t ny, double spacing, Point2 origin);

    // Grid whose geometric center lies at (0, 0).
    static Grid2D centered(std::size_t nx, std::size_t ny, double spacing);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }
    double spacing() const { return spacing_; }
    Point2 origin() const { return origin_; }

    double x(std::size_t ix) const { return origin_.x + spacing_ * static_cast<double>(ix); }
    double y(std::size_t iy) const { return origin_.y + spacing_ * static_cast<double>(iy); }
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }

    Point2 center() const;
    double x_max() const { return x(nx_ - 1); }
    double y_max() const { return y(ny_ - 1); }

    // True if p lies within the closed physical extent of the node lattice.
    bool contains(Point2 p) const;

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    std::size_t nx_;
    std::size_t ny_;
    double spacing_;
    Point2 origin_;
};

// Equidistant output time samples on [0, t_max].
class TimeAxis {
public:
    TimeAxis(std::size_t num_samples, double t_max);

    std::size_t num_samples() const { return num_samples_; }
    double t_max() const { return t_max_; }
    double dt() const { return t_max_ / static_cast<double>(num_samples_ - 1); }
    double t(std::size_t k) const { return dt() * static_cast<double>(k); }

    friend bool operator==(const TimeAxis&, const TimeAxis&) = default;

private:
    std::size_t num_samples_;
    double t_max_;
};

// Point detectors equispaced on a circle (or on an arc of it).
//
// A full circle (coverage >= 2*pi) places sensor i at angle
// start + 2*pi*i/n. A partial arc includes both endpoints.
class DetectorGeometry {
public:
    DetectorGeometry(Point2 center, double radius, std::size_t num_sensors,
                     double angular_coverage = 2.0 * std::numbers::pi,
                     double start_angle = 0.0);

    Point2 center() const { return center_; }
    double radius() const { return radius_; }
    std::size_t num_sensors() const { return positions_.size(); }
    double angular_coverage() const { return coverage_; }
    double start_angle() const { return start_angle_; }
    bool full_circle() const;

    const std::vector<Point2>& sensor_positions() const { return positions_; }

    // Arc length attributed to each sensor (quadrature weight on the curve).
    double arc_weight() const;

    // Throws ConfigError unless every sensor lies inside the grid extent.
    void validate_within(const Grid2D& grid) const;

    // Throws ConfigError unless the whole detection disc lies inside the grid.
    void validate_disc_within(const Grid2D& grid) const;

private:
    Point2 center_;
    double radius_;
    double coverage_;
    double start_angle_;
    std::vector<Point2> positions_;
};

} // namespace cspat
