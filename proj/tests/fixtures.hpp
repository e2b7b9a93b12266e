#pragma once

#include "cspat/harness.hpp"
#include "cspat/phantom.hpp"
#include "cspat/recon.hpp"

#include <memory>

namespace cspat::fixtures {

// Simulated noise-free CS data for one manifest, built the same way
// run_experiment builds it.
struct Instance {
    harness::ExperimentManifest manifest;
    harness::Setup setup;
    SourceImage truth;
    std::unique_ptr<sensing::CsOperator> op;
    SensorData y;
    SensorData y2;

    recon::JointProblem problem() const { return recon::JointProblem(*op, y, y2); }
};

inline Instance make_instance(harness::ExperimentManifest mf, const SourceImage* source = nullptr) {
    mf = harness::resolve(std::move(mf), 0);
    harness::Setup setup = harness::make_setup(mf);
    SourceImage truth = source ? *source : harness::make_phantom(mf, setup);
    auto op = std::make_unique<sensing::CsOperator>(
        setup.wave, setup.geometry, sensing::make_matrix(mf.matrix, mf.m, mf.num_sensors, *mf.matrix_seed));
    SensorData y = op->forward(truth);
    SensorData y2 = wave::second_time_derivative(y);
    return Instance{std::move(mf), std::move(setup), std::move(truth), std::move(op), std::move(y), std::move(y2)};
}

// Cross phantom, 64 x 64, n = 100, m = 25 Bernoulli.
inline harness::ExperimentManifest reference_manifest() {
    harness::ExperimentManifest mf;
    mf.recon.max_iters = 2000;
    return mf;
}

// Two isolated unit-scale spikes: L f has exactly 10 nonzeros.
inline SourceImage two_spikes(const Grid2D& grid) {
    SourceImage f(grid);
    f(grid.nx() / 2 - 6, grid.ny() / 2 - 2) = 1.0;
    f(grid.nx() / 2 + 6, grid.ny() / 2 + 3) = 0.7;
    return f;
}

} // namespace cspat::fixtures
