#include "cspat/wave.hpp"

#include "cspat/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace cspat::wave {

WaveConfig WaveConfig::uniform(const Grid2D& grid, double c, TimeAxis axis, Sponge sponge) {
    return WaveConfig{SourceImage(grid, c), axis, 0, sponge};
}

std::size_t WaveConfig::substeps() const {
    if (cfl_substeps > 0) return cfl_substeps;
    const double ratio = c_max() * time_axis.dt() / (kMaxCfl * grid().spacing());
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-12)));
}

void WaveConfig::validate() const {
    if (!sound_speed.all_finite() || sound_speed.min() <= 0.0) {
        throw ConfigError("sound speed must be finite and positive everywhere");
    }
    const double cfl = c_max() * internal_dt() / grid().spacing();
    if (cfl > kMaxCfl + 1e-12) {
        std::ostringstream msg;
        msg << "CFL violation: c_max=" << c_max() << ", dt=" << internal_dt() << ", spacing=" << grid().spacing()
            << " give CFL number " << cfl << " > " << kMaxCfl;
        throw ConfigError(msg.str());
    }
    if (2 * sponge.width >= std::min(grid().nx(), grid().ny())) {
        throw ConfigError("sponge layer of width " + std::to_string(sponge.width) + " does not fit the grid");
    }
    if (sponge.max_damping < 0.0) throw ConfigError("sponge damping must be nonnegative");
    if (!(data_scale > 0.0) || !std::isfinite(data_scale)) throw ConfigError("data scale must be positive");
}

double estimate_operator_norm(const WaveConfig& cfg, const DetectorGeometry& geometry, std::size_t iterations) {
    WaveConfig raw = cfg;
    raw.data_scale = 1.0;
    const Propagator prop(raw, geometry);
    const Grid2D& g = raw.grid();
    // Start from a smooth bump centred in the detection disc.
    SourceImage x(g);
    const Point2 c = geometry.center();
    const double r = geometry.radius();
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
            const double rho = std::hypot(g.x(ix) - c.x, g.y(iy) - c.y) / r;
            if (rho < 1.0) x(ix, iy) = 1.0 - rho * rho;
        }
    }
    double sigma2 = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        x *= 1.0 / norm2(x);
        x = prop.adjoint(prop.forward(x));
        sigma2 = norm2(x);
    }
    return std::sqrt(sigma2);
}

std::size_t default_sponge_width(const Grid2D& grid, const DetectorGeometry& geometry) {
    const Point2 c = geometry.center();
    const double clearance = std::min({c.x - grid.x(0), grid.x_max() - c.x, c.y - grid.y(0), grid.y_max() - c.y}) -
                             geometry.radius();
    const double nodes = std::floor(clearance / grid.spacing()) - 2.0;
    if (nodes <= 0.0) return 0;
    return std::min<std::size_t>(16, static_cast<std::size_t>(nodes));
}

Propagator::Propagator(WaveConfig config, const DetectorGeometry& geometry)
    : config_(std::move(config)), substeps_(config_.substeps()) {
    config_.validate();
    geometry.validate_within(config_.grid());

    const Grid2D& g = config_.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double dt = config_.internal_dt();
    const double h = g.spacing();

    courant2_.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double r = config_.sound_speed[k] * dt / h;
        courant2_[k] = r * r;
    }

    decay_fwd_.assign(g.size(), 1.0);
    memory_fwd_.assign(g.size(), 1.0);
    decay_bwd_.assign(g.size(), 1.0);
    memory_bwd_.assign(g.size(), 1.0);
    const Sponge& sp = config_.sponge;
    if (sp.width > 0 && sp.max_damping > 0.0) {
        const double w = static_cast<double>(sp.width);
        const double norm = std::expm1(sp.taper);
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t d = std::min({ix, nx - 1 - ix, iy, ny - 1 - iy});
                if (d >= sp.width) continue;
                const double xi = (w - static_cast<double>(d)) / w;
                const double sigma = sp.max_damping * std::expm1(sp.taper * xi) / norm;
                const double half = 0.5 * sigma * dt;
                const std::size_t k = g.index(ix, iy);
                decay_fwd_[k] = 1.0 / (1.0 + half);
                memory_fwd_[k] = (1.0 - half) / (1.0 + half);
                decay_bwd_[k] = 1.0 / (1.0 - half);
                memory_bwd_[k] = (1.0 + half) / (1.0 - half);
            }
        }
    }

    courant_decay_.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) courant_decay_[k] = courant2_[k] * decay_fwd_[k];
    zeros_.assign(nx, 0.0);
    sponge_width_ = (sp.width > 0 && sp.max_damping > 0.0) ? sp.width : 0;
    interior_rows_.assign(ny, false);
    for (std::size_t iy = sponge_width_; iy + sponge_width_ < ny; ++iy) interior_rows_[iy] = true;

    for (const Point2& p : geometry.sensor_positions()) {
        const double fx = (p.x - g.origin().x) / h;
        const double fy = (p.y - g.origin().y) / h;
        const auto ix = static_cast<std::size_t>(std::clamp(std::floor(fx), 0.0, static_cast<double>(nx - 2)));
        const auto iy = static_cast<std::size_t>(std::clamp(std::floor(fy), 0.0, static_cast<double>(ny - 2)));
        const double wx = fx - static_cast<double>(ix);
        const double wy = fy - static_cast<double>(iy);
        SensorStencil s;
        s.node = {g.index(ix, iy), g.index(ix + 1, iy), g.index(ix, iy + 1), g.index(ix + 1, iy + 1)};
        s.weight = {(1.0 - wx) * (1.0 - wy), wx * (1.0 - wy), (1.0 - wx) * wy, wx * wy};
        stencils_.push_back(s);
    }
}

// Unscaled 5-point stencil with zero padding.
void Propagator::laplacian_into(std::span<const double> in, std::span<double> out) const {
    const std::size_t nx = grid().nx();
    const std::size_t ny = grid().ny();
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double* c = in.data() + iy * nx;
        const double* up = iy + 1 < ny ? c + nx : nullptr;
        const double* down = iy > 0 ? c - nx : nullptr;
        double* o = out.data() + iy * nx;
        if (up && down) {
            o[0] = c[1] + up[0] + down[0] - 4.0 * c[0];
            for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
                o[ix] = c[ix - 1] + c[ix + 1] + up[ix] + down[ix] - 4.0 * c[ix];
            }
            o[nx - 1] = c[nx - 2] + up[nx - 1] + down[nx - 1] - 4.0 * c[nx - 1];
        } else {
            const double* other = up ? up : down;
            o[0] = c[1] + other[0] - 4.0 * c[0];
            for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
                o[ix] = c[ix - 1] + c[ix + 1] + other[ix] - 4.0 * c[ix];
            }
            o[nx - 1] = c[nx - 2] + other[nx - 1] - 4.0 * c[nx - 1];
        }
    }
}

// next = A (2 cur + C L cur) - B prev, one pass over the rows.
void Propagator::leapfrog_step(std::span<const double> cur, std::span<const double> prev,
                               std::span<double> next) const {
    const std::size_t nx = grid().nx();
    const std::size_t ny = grid().ny();
    const double* a = decay_fwd_.data();
    const double* b = memory_fwd_.data();
    const double* c2 = courant2_.data();
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const std::size_t base = iy * nx;
        const double* c = cur.data() + base;
        const double* up = iy + 1 < ny ? c + nx : zeros_.data();
        const double* down = iy > 0 ? c - nx : zeros_.data();
        const double* pa = a + base;
        const double* pb = b + base;
        const double* pc = c2 + base;
        const double* pp = prev.data() + base;
        double* o = next.data() + base;
        auto update = [&](std::size_t ix, double lap) {
            o[ix] = pa[ix] * (2.0 * c[ix] + pc[ix] * lap) - pb[ix] * pp[ix];
        };
        update(0, c[1] + up[0] + down[0] - 4.0 * c[0]);
        if (interior_rows_[iy]) {
            const std::size_t lo = sponge_width_;
            const std::size_t hi = nx - sponge_width_;
            for (std::size_t ix = 1; ix < lo; ++ix) update(ix, c[ix - 1] + c[ix + 1] + up[ix] + down[ix] - 4.0 * c[ix]);
            for (std::size_t ix = std::max<std::size_t>(lo, 1); ix < std::min(hi, nx - 1); ++ix) {
                o[ix] = 2.0 * c[ix] + pc[ix] * (c[ix - 1] + c[ix + 1] + up[ix] + down[ix] - 4.0 * c[ix]) - pp[ix];
            }
            for (std::size_t ix = std::max(hi, lo); ix + 1 < nx; ++ix) {
                update(ix, c[ix - 1] + c[ix + 1] + up[ix] + down[ix] - 4.0 * c[ix]);
            }
        } else {
            for (std::size_t ix = 1; ix + 1 < nx; ++ix) update(ix, c[ix - 1] + c[ix + 1] + up[ix] + down[ix] - 4.0 * c[ix]);
        }
        update(nx - 1, c[nx - 2] + up[nx - 1] + down[nx - 1] - 4.0 * c[nx - 1]);
    }
}

// lam = 2 A lam1 + L (C A lam1) - B lam2, with scratch holding C A lam1.
void Propagator::adjoint_step(std::span<const double> lam1, std::span<const double> lam2, std::span<double> scratch,
                              std::span<double> lam) const {
    const std::size_t n = grid().size();
    const double* ca = courant_decay_.data();
    for (std::size_t k = 0; k < n; ++k) scratch[k] = ca[k] * lam1[k];
    const std::size_t nx = grid().nx();
    const std::size_t ny = grid().ny();
    const double* a = decay_fwd_.data();
    const double* b = memory_fwd_.data();
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const std::size_t base = iy * nx;
        const double* c = scratch.data() + base;
        const double* up = iy + 1 < ny ? c + nx : zeros_.data();
        const double* down = iy > 0 ? c - nx : zeros_.data();
        const double* l1 = lam1.data() + base;
        const double* l2 = lam2.data() + base;
        const double* pa = a + base;
        const double* pb = b + base;
        double* o = lam.data() + base;
        o[0] = 2.0 * pa[0] * l1[0] + (c[1] + up[0] + down[0] - 4.0 * c[0]) - pb[0] * l2[0];
        for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
            o[ix] = 2.0 * pa[ix] * l1[ix] + (c[ix - 1] + c[ix + 1] + up[ix] + down[ix] - 4.0 * c[ix]) - pb[ix] * l2[ix];
        }
        o[nx - 1] = 2.0 * pa[nx - 1] * l1[nx - 1] + (c[nx - 2] + up[nx - 1] + down[nx - 1] - 4.0 * c[nx - 1]) -
                    pb[nx - 1] * l2[nx - 1];
    }
}

std::vector<double> Propagator::sample(std::span<const double> field) const {
    std::vector<double> out(stencils_.size());
    for (std::size_t s = 0; s < stencils_.size(); ++s) {
        const SensorStencil& st = stencils_[s];
        out[s] = st.weight[0] * field[st.node[0]] + st.weight[1] * field[st.node[1]] +
                 st.weight[2] * field[st.node[2]] + st.weight[3] * field[st.node[3]];
    }
    return out;
}

void Propagator::check_finite(std::span<const double> values, std::size_t sample) const {
    double sum = 0.0;
    for (double v : values) sum += v;
    if (!std::isfinite(sum)) {
        throw NumericalError("wave solver became unstable at time sample " + std::to_string(sample));
    }
}

PressureField Propagator::start(const SourceImage& f) const {
    require_same_grid(f, config_.sound_speed, "wave source");
    const auto v = f.values();
    return PressureField{{}, std::vector<double>(v.begin(), v.end()), 0};
}

void Propagator::advance(PressureField& field, int direction) const {
    const std::size_t n = grid().size();
    std::vector<double> lap(n);
    laplacian_into(field.current, lap);
    std::vector<double> next(n);
    if (field.step == 0) {
        // p_t(0) = 0 makes the step to +-dt symmetric: p(dt) = p(0) + C L p(0) / 2.
        for (std::size_t k = 0; k < n; ++k) next[k] = field.current[k] + 0.5 * courant2_[k] * lap[k];
    } else {
        const auto& a = direction > 0 ? decay_fwd_ : decay_bwd_;
        const auto& b = direction > 0 ? memory_fwd_ : memory_bwd_;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] = a[k] * (2.0 * field.current[k] + courant2_[k] * lap[k]) - b[k] * field.previous[k];
        }
    }
    field.previous = std::move(field.current);
    field.current = std::move(next);
    field.step += direction > 0 ? 1 : -1;
}

SensorData Propagator::forward(const SourceImage& f) const {
    require_same_grid(f, config_.sound_speed, "forward_W source");
    const TimeAxis& axis = config_.time_axis;
    const std::size_t n = grid().size();
    const std::size_t samples = axis.num_samples();
    const std::size_t steps = (samples - 1) * substeps_;
    SensorData out(num_sensors(), axis);
    const double scale = config_.data_scale;

    auto record = [&](std::span<const double> field, std::size_t j) {
        const auto s = sample(field);
        for (std::size_t r = 0; r < s.size(); ++r) out(r, j) = scale * s[r];
        check_finite(s, j);
    };

    std::vector<double> prev(n);
    std::vector<double> cur(f.values().begin(), f.values().end());
    std::vector<double> next(n);
    std::vector<double> lap(n);
    record(cur, 0);

    for (std::size_t step = 1; step <= steps; ++step) {
        if (step == 1) {
            laplacian_into(cur, lap);
            for (std::size_t k = 0; k < n; ++k) next[k] = cur[k] + 0.5 * courant2_[k] * lap[k];
        } else {
            leapfrog_step(cur, prev, next);
        }
        std::swap(prev, cur);
        std::swap(cur, next);
        if (step % substeps_ == 0) {
            const std::size_t j = step / substeps_;
            record(cur, j);
            if (j % 16 == 0) check_finite(cur, j);
        }
    }
    return out;
}

// Transpose of forward(). With u_1 = u_0 + C L u_0 / 2 and
// u_{n+1} = A (2 u_n + C L u_n) - B u_{n-1}, the adjoint variables obey
//   lam_n = d_n + (2 + L C) A lam_{n+1} - B lam_{n+2}      (n >= 1)
//   W* g  = d_0 + lam_1 + L C lam_1 / 2 - B lam_2
// where d_n = P^T g_j when n = j * substeps and zero otherwise.
SourceImage Propagator::adjoint(const SensorData& data) const {
    const TimeAxis& axis = config_.time_axis;
    if (data.rows() != num_sensors() || !(data.time_axis() == axis)) {
        throw ShapeError("adjoint_W: data is " + std::to_string(data.rows()) + "x" +
                         std::to_string(data.num_samples()) + ", expected " + std::to_string(num_sensors()) + "x" +
                         std::to_string(axis.num_samples()));
    }
    const std::size_t n = grid().size();
    const std::size_t samples = axis.num_samples();
    const std::size_t steps = (samples - 1) * substeps_;

    auto inject = [&](std::vector<double>& field, std::size_t j) {
        for (std::size_t r = 0; r < stencils_.size(); ++r) {
            const SensorStencil& st = stencils_[r];
            const double g = config_.data_scale * data(r, j);
            for (int q = 0; q < 4; ++q) field[st.node[q]] += st.weight[q] * g;
        }
    };

    std::vector<double> lam1(n, 0.0);  // lam_{n+1}
    std::vector<double> lam2(n, 0.0);  // lam_{n+2}
    std::vector<double> lam(n);
    std::vector<double> cw(n);
    std::vector<double> lap(n);

    for (std::size_t step = steps; step >= 1; --step) {
        adjoint_step(lam1, lam2, cw, lam);
        if (step % substeps_ == 0) {
            const std::size_t j = step / substeps_;
            inject(lam, j);
            if (j % 16 == 0) check_finite(lam, j);
        }
        std::swap(lam2, lam1);
        std::swap(lam1, lam);
    }
    // lam1 = lam_1, lam2 = lam_2
    for (std::size_t k = 0; k < n; ++k) cw[k] = courant2_[k] * lam1[k];
    laplacian_into(cw, lap);
    SourceImage out(grid());
    auto o = out.values();
    for (std::size_t k = 0; k < n; ++k) o[k] = lam1[k] + 0.5 * lap[k] - memory_fwd_[k] * lam2[k];
    std::vector<double> d0(n, 0.0);
    inject(d0, 0);
    for (std::size_t k = 0; k < n; ++k) o[k] += d0[k];
    check_finite(o, 0);
    return out;
}

SensorData forward_W(const SourceImage& f, const WaveConfig& cfg, const DetectorGeometry& geometry) {
    return Propagator(cfg, geometry).forward(f);
}

SourceImage adjoint_W(const SensorData& data, const WaveConfig& cfg, const DetectorGeometry& geometry) {
    return Propagator(cfg, geometry).adjoint(data);
}

SensorData second_time_derivative(const SensorData& data) {
    const std::size_t t = data.num_samples();
    if (t < 3) throw ConfigError("second time derivative needs at least 3 samples");
    const double inv = 1.0 / (data.time_axis().dt() * data.time_axis().dt());
    SensorData out(data.rows(), data.time_axis());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto d = data.row(r);
        auto o = out.row(r);
        for (std::size_t k = 1; k + 1 < t; ++k) o[k] = (d[k + 1] - 2.0 * d[k] + d[k - 1]) * inv;
        if (t >= 4) {
            o[0] = (2.0 * d[0] - 5.0 * d[1] + 4.0 * d[2] - d[3]) * inv;
            o[t - 1] = (2.0 * d[t - 1] - 5.0 * d[t - 2] + 4.0 * d[t - 3] - d[t - 4]) * inv;
        } else {
            o[0] = o[1];
            o[t - 1] = o[1];
        }
    }
    return out;
}

double verify_commutation(const SourceImage& f, const WaveConfig& cfg, const DetectorGeometry& geometry) {
    const Propagator prop(cfg, geometry);
    const SourceImage c2 = hadamard(cfg.sound_speed, cfg.sound_speed);
    const SensorData rhs = prop.forward(hadamard(discrete_laplacian(f), c2));
    const double denom = norm2(rhs);
    if (denom == 0.0) return 0.0;
    const SensorData lhs = second_time_derivative(prop.forward(f));
    return norm2(lhs - rhs) / denom;
}

} // namespace cspat::wave
