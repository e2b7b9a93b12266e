#include "cspat/error.hpp"
#include "cspat/recon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace cspat::recon {

namespace {

// dp/dt by central differences, one-sided at the ends.
std::vector<double> time_derivative(std::span<const double> p, double dt) {
    const std::size_t n = p.size();
    std::vector<double> out(n);
    out[0] = (p[1] - p[0]) / dt;
    out[n - 1] = (p[n - 1] - p[n - 2]) / dt;
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (p[k + 1] - p[k - 1]) / (2.0 * dt);
    return out;
}

} // namespace

// f(x) = -1/pi sum_z ds int_{c t > |x - z|} p_t(z, t) / sqrt(c^2 t^2 - |x - z|^2) dt
//
// p_t is treated as piecewise constant on the sample cells and the Abel
// kernel is integrated exactly over each cell, so the singularity at
// c t = |x - z| is integrable. The data are divided by cfg.data_scale first.
SourceImage fbp_reconstruct(const SensorData& data, const DetectorGeometry& geometry, const wave::WaveConfig& cfg) {
    if (data.rows() != geometry.num_sensors()) {
        throw ShapeError("fbp_reconstruct: data has " + std::to_string(data.rows()) + " rows but geometry has " +
                         std::to_string(geometry.num_sensors()) + " sensors");
    }
    const Grid2D& grid = cfg.grid();
    const TimeAxis& axis = data.time_axis();
    const std::size_t samples = axis.num_samples();
    const auto c_values = cfg.sound_speed.values();
    const double c = std::accumulate(c_values.begin(), c_values.end(), 0.0) / static_cast<double>(c_values.size());

    const auto& sensors = geometry.sensor_positions();
    double d_max = 0.0;
    const Point2 corners[] = {{grid.x(0), grid.y(0)}, {grid.x_max(), grid.y(0)}, {grid.x(0), grid.y_max()},
                              {grid.x_max(), grid.y_max()}};
    for (const Point2& s : sensors) {
        for (const Point2& q : corners) d_max = std::max(d_max, std::hypot(q.x - s.x, q.y - s.y));
    }
    const double d_step = 0.25 * grid.spacing();
    const double d_min = 1e-3 * grid.spacing();
    const std::size_t n_dist = static_cast<std::size_t>(std::ceil(d_max / d_step)) + 2;

    // Cell boundaries in travelled distance c t.
    std::vector<double> edges(samples + 1);
    edges[0] = 0.0;
    for (std::size_t k = 1; k < samples; ++k) edges[k] = c * 0.5 * (axis.t(k - 1) + axis.t(k));
    edges[samples] = c * axis.t_max();

    // weights[j * samples + k] = int_{cell k, c t > d_j} dt / sqrt(c^2 t^2 - d_j^2)
    std::vector<double> weights(n_dist * samples);
    std::vector<double> anti(samples + 1);
    for (std::size_t j = 0; j < n_dist; ++j) {
        const double d = std::max(d_step * static_cast<double>(j), d_min);
        for (std::size_t k = 0; k <= samples; ++k) {
            const double e = std::max(edges[k], d);
            anti[k] = std::log(e + std::sqrt(e * e - d * d));
        }
        for (std::size_t k = 0; k < samples; ++k) weights[j * samples + k] = (anti[k + 1] - anti[k]) / c;
    }

    const double prefactor = -geometry.arc_weight() / (std::numbers::pi * cfg.data_scale);
    const Point2 centre = geometry.center();
    SourceImage out(grid);
    std::vector<double> kernel(n_dist);
    for (std::size_t s = 0; s < sensors.size(); ++s) {
        const std::vector<double> q = time_derivative(data.row(s), axis.dt());
        for (std::size_t j = 0; j < n_dist; ++j) {
            const double* w = weights.data() + j * samples;
            double acc = 0.0;
            for (std::size_t k = 0; k < samples; ++k) acc += w[k] * q[k];
            kernel[j] = acc;
        }
        for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
            for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
                const double px = grid.x(ix);
                const double py = grid.y(iy);
                if (std::hypot(px - centre.x, py - centre.y) > geometry.radius()) continue;
                const double pos = std::hypot(px - sensors[s].x, py - sensors[s].y) / d_step;
                const auto j = std::min(static_cast<std::size_t>(pos), n_dist - 2);
                const double frac = pos - static_cast<double>(j);
                out(ix, iy) += prefactor * ((1.0 - frac) * kernel[j] + frac * kernel[j + 1]);
            }
        }
    }
    return out;
}

} // namespace cspat::recon
