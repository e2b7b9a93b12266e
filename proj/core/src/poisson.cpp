#include "cspat/poisson.hpp"

#include "cspat/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace cspat {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

constexpr double kResidualTolerance = 1e-10;

} // namespace

SourceImage poisson_solve(const SourceImage& g) {
    const Grid2D& grid = g.grid();
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    if (!g.all_finite()) throw NumericalError("poisson_solve: right-hand side is not finite");

    std::vector<double> buffer(g.values().begin(), g.values().end());
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_r2r_2d(static_cast<int>(ny), static_cast<int>(nx), buffer.data(), buffer.data(),
                                    FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE));
    }
    if (!plan) throw NumericalError("poisson_solve: could not create sine transform plan");

    fftw_execute(plan.get());

    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    const double normalisation = 4.0 * static_cast<double>(nx + 1) * static_cast<double>(ny + 1);
    for (std::size_t q = 0; q < ny; ++q) {
        const double sy = std::sin(0.5 * std::numbers::pi * static_cast<double>(q + 1) / static_cast<double>(ny + 1));
        for (std::size_t p = 0; p < nx; ++p) {
            const double sx =
                std::sin(0.5 * std::numbers::pi * static_cast<double>(p + 1) / static_cast<double>(nx + 1));
            const double eigenvalue = -4.0 * (sx * sx + sy * sy) * inv_h2;
            buffer[q * nx + p] /= eigenvalue * normalisation;
        }
    }

    fftw_execute(plan.get());

    SourceImage f(grid, std::move(buffer));
    const double gnorm = norm2(g);
    if (gnorm > 0.0) {
        const double residual = norm2(discrete_laplacian(f) - g) / gnorm;
        if (!(residual <= kResidualTolerance)) {
            std::ostringstream msg;
            msg << "poisson_solve did not converge: relative residual " << residual;
            throw NumericalError(msg.str());
        }
    }
    return f;
}

} // namespace cspat
