#pragma once

#include "cspat/grid.hpp"
#include "cspat/image.hpp"
#include "cspat/sensor_data.hpp"

#include <array>
#include <span>
#include <cstddef>
#include <vector>

namespace cspat::wave {

// Damping layer along the four grid edges. The damping rate rises
// exponentially from 0 at the inner edge to max_damping at the outer edge.
struct Sponge {
    std::size_t width = 16;
    double max_damping = 2.0;
    double taper = 3.0;
};

inline constexpr double kMaxCfl = 0.5;

struct WaveConfig {
    SourceImage sound_speed;
    TimeAxis time_axis;
    // Solver steps per output sample; 0 selects ceil(c_max dt_out / (0.5 h)).
    std::size_t cfl_substeps = 0;
    Sponge sponge;
    // Multiplies every detector sample (and the matching injection in the
    // adjoint). 1 gives raw pressures.
    double data_scale = 1.0;

    static WaveConfig uniform(const Grid2D& grid, double c, TimeAxis axis, Sponge sponge = {});

    const Grid2D& grid() const { return sound_speed.grid(); }
    double c_max() const { return sound_speed.max(); }
    std::size_t substeps() const;
    double internal_dt() const { return time_axis.dt() / static_cast<double>(substeps()); }

    // Throws ConfigError on c <= 0 or a CFL number above kMaxCfl.
    void validate() const;
};

// Spectral norm of the unscaled detector sampling operator, by a fixed number
// of power iterations from a deterministic start.
double estimate_operator_norm(const WaveConfig& cfg, const DetectorGeometry& geometry, std::size_t iterations = 20);

// Largest sponge width (capped at 16) that keeps two clear nodes between the
// detection circle and the damping layer.
std::size_t default_sponge_width(const Grid2D& grid, const DetectorGeometry& geometry);

// Two time levels of the leapfrog scheme.
struct PressureField {
    std::vector<double> previous;
    std::vector<double> current;
    long step = 0;
};

// Leapfrog discretisation of p_tt + sigma p_t = c^2 Lap p with p(0) = f and
// p_t(0) = 0, sampled at the detectors by bilinear interpolation. Owns the
// precomputed coefficients, so one instance is reused across many solves.
class Propagator {
public:
    Propagator(WaveConfig config, const DetectorGeometry& geometry);

    const WaveConfig& config() const { return config_; }
    const Grid2D& grid() const { return config_.grid(); }
    std::size_t num_sensors() const { return stencils_.size(); }
    std::size_t substeps() const { return substeps_; }

    // W f: n x T pressure traces.
    SensorData forward(const SourceImage& f) const;

    // W* g: exact transpose of forward().
    SourceImage adjoint(const SensorData& data) const;

    // Field at step 0, ready for advance().
    PressureField start(const SourceImage& f) const;

    // One internal step. direction = -1 integrates towards negative times.
    void advance(PressureField& field, int direction = +1) const;

    // Bilinear read-out of one field at every detector.
    std::vector<double> sample(std::span<const double> field) const;

private:
    struct SensorStencil {
        std::array<std::size_t, 4> node{};
        std::array<double, 4> weight{};
    };

    void laplacian_into(std::span<const double> in, std::span<double> out) const;
    void leapfrog_step(std::span<const double> cur, std::span<const double> prev, std::span<double> next) const;
    void adjoint_step(std::span<const double> lam1, std::span<const double> lam2, std::span<double> scratch,
                      std::span<double> lam) const;
    void check_finite(std::span<const double> row, std::size_t sample) const;

    WaveConfig config_;
    std::size_t substeps_;
    std::vector<double> courant2_;      // (c dt / h)^2 per node
    std::vector<double> decay_fwd_;     // 1 / (1 + sigma dt / 2)
    std::vector<double> memory_fwd_;    // (1 - sigma dt / 2) / (1 + sigma dt / 2)
    std::vector<double> decay_bwd_;
    std::vector<double> memory_bwd_;
    std::vector<double> courant_decay_; // courant2_ * decay_fwd_
    std::vector<double> zeros_;         // one zero row for the padded stencil
    std::vector<bool> interior_rows_;   // rows with no damped nodes between the side layers
    std::size_t sponge_width_ = 0;
    std::vector<SensorStencil> stencils_;
};

SensorData forward_W(const SourceImage& f, const WaveConfig& cfg, const DetectorGeometry& geometry);
SourceImage adjoint_W(const SensorData& data, const WaveConfig& cfg, const DetectorGeometry& geometry);

// Second time derivative per row: central differences inside, second-order
// one-sided four-point stencils at both ends.
SensorData second_time_derivative(const SensorData& data);

// ||d_tt W f - W[c^2 Lap f]|| / ||W[c^2 Lap f]||; 0 when f = 0.
double verify_commutation(const SourceImage& f, const WaveConfig& cfg, const DetectorGeometry& geometry);

} // namespace cspat::wave
