#include "cspat/error.hpp"
#include "cspat/rng.hpp"
#include "cspat/sensing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace cspat;
using sensing::MatrixKind;

namespace {

SensorData gaussian_data(std::size_t rows, const TimeAxis& ax, std::uint64_t seed) {
    Rng rng(seed);
    SensorData d(rows, ax);
    for (double& v : d.values()) v = rng.gaussian();
    return d;
}

struct Scene {
    Grid2D grid = Grid2D::centered(32, 32, 1.0);
    DetectorGeometry geometry{{0, 0}, 10.85, 16};
    wave::WaveConfig cfg = wave::WaveConfig::uniform(grid, 1.0, TimeAxis(101, 21.7));
    Scene() { cfg.sponge.width = wave::default_sponge_width(grid, geometry); }
};

} // namespace

TEST(Matrix, BernoulliEntriesAreExactlyPlusMinusHalf) {
    const auto a = sensing::make_matrix(MatrixKind::bernoulli, 4, 8, 9);
    ASSERT_EQ(a.entries.size(), 32u);
    int plus = 0;
    for (double v : a.entries) {
        EXPECT_EQ(std::abs(v), 0.5);
        plus += v > 0;
    }
    EXPECT_GT(plus, 0);
    EXPECT_LT(plus, 32);
}

TEST(Matrix, SubsampleSelectsEquispacedSensors) {
    const auto a = sensing::make_matrix(MatrixKind::subsample, 2, 8, 0);
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(a(j, i), i == 4 * j ? 1.0 : 0.0);
    }
    EXPECT_EQ(sensing::make_matrix(MatrixKind::subsample, 5, 5, 0), sensing::identity_matrix(5));
}

TEST(Matrix, GaussianMeanWithinClt) {
    const std::size_t m = 100, n = 200;
    const auto a = sensing::make_matrix(MatrixKind::gaussian, m, n, 17);
    double mean = 0.0;
    for (double v : a.entries) mean += v;
    mean /= static_cast<double>(m * n);
    EXPECT_LE(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(m * n * m)));
}

TEST(Matrix, ColumnNormsConcentrate) {
    for (MatrixKind kind : {MatrixKind::bernoulli, MatrixKind::gaussian}) {
        const auto a = sensing::make_matrix(kind, 50, 100, 5);
        for (std::size_t i = 0; i < 100; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 50; ++j) s += a(j, i) * a(j, i);
            EXPECT_GE(std::sqrt(s), 0.5);
            EXPECT_LE(std::sqrt(s), 1.5);
        }
    }
}

TEST(Matrix, RegenerationIsBitIdentical) {
    for (MatrixKind kind : {MatrixKind::bernoulli, MatrixKind::gaussian, MatrixKind::subsample}) {
        EXPECT_EQ(sensing::make_matrix(kind, 20, 50, 3), sensing::make_matrix(kind, 20, 50, 3));
    }
    EXPECT_NE(sensing::make_matrix(MatrixKind::gaussian, 20, 50, 3).entries,
              sensing::make_matrix(MatrixKind::gaussian, 20, 50, 4).entries);
}

TEST(Matrix, CompressionOnly) {
    EXPECT_THROW(sensing::make_matrix(MatrixKind::bernoulli, 9, 8, 0), ConfigError);
    EXPECT_THROW(sensing::make_matrix(MatrixKind::bernoulli, 0, 8, 0), ConfigError);
    EXPECT_EQ(sensing::parse_matrix_kind("gaussian"), MatrixKind::gaussian);
    EXPECT_THROW(sensing::parse_matrix_kind("hadamard"), ConfigError);
}

TEST(ApplyA, HandComputedProducts) {
    sensing::MeasurementMatrix a{MatrixKind::gaussian, 2, 2, 0, {1.0, 2.0, -1.0, 0.5}};
    SensorData d(2, TimeAxis(3, 1.0), {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    const SensorData y = sensing::apply_A(a, d);
    EXPECT_EQ(y.values()[0], 9.0);   // 1*1 + 2*4
    EXPECT_EQ(y.values()[2], 15.0);  // 1*3 + 2*6
    EXPECT_EQ(y.values()[3], 1.0);   // -1*1 + 0.5*4
    EXPECT_EQ(y.values()[5], 0.0);   // -1*3 + 0.5*6
    const SensorData t = sensing::apply_A_transpose(a, d);
    EXPECT_EQ(t.values()[0], -3.0);  // 1*1 - 1*4
    EXPECT_EQ(t.values()[3], 4.0);   // 2*1 + 0.5*4
}

TEST(ApplyA, IdentityZeroAndShapes) {
    const TimeAxis ax(7, 1.0);
    const SensorData d = gaussian_data(5, ax, 1);
    EXPECT_EQ(sensing::apply_A(sensing::identity_matrix(5), d), d);
    EXPECT_EQ(norm2(sensing::apply_A(sensing::make_matrix(MatrixKind::gaussian, 3, 5, 1), SensorData(5, ax))), 0.0);
    EXPECT_THROW(sensing::apply_A(sensing::identity_matrix(4), d), ShapeError);
    EXPECT_THROW(sensing::apply_A_transpose(sensing::identity_matrix(4), d), ShapeError);
}

TEST(ApplyA, TransposeIdentityForEveryKind) {
    const TimeAxis ax(9, 1.0);
    std::uint64_t seed = 0;
    for (MatrixKind kind : {MatrixKind::bernoulli, MatrixKind::gaussian, MatrixKind::subsample}) {
        for (auto [m, n] : {std::pair<std::size_t, std::size_t>{3, 7}, {10, 10}, {1, 4}}) {
            const auto a = sensing::make_matrix(kind, m, n, ++seed);
            const SensorData x = gaussian_data(n, ax, 10 * seed), y = gaussian_data(m, ax, 10 * seed + 1);
            const double lhs = dot(sensing::apply_A(a, x), y);
            EXPECT_NEAR(lhs, dot(x, sensing::apply_A_transpose(a, y)), 1e-12 * (1.0 + std::abs(lhs)));
        }
    }
}

TEST(ApplyA, SubsampleTransposeScatters) {
    const auto a = sensing::make_matrix(MatrixKind::subsample, 2, 6, 0);
    const SensorData y = gaussian_data(2, TimeAxis(4, 1.0), 3);
    const SensorData x = sensing::apply_A_transpose(a, y);
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double expected = r == 0 ? y(0, k) : r == 3 ? y(1, k) : 0.0;
            EXPECT_EQ(x(r, k), expected);
        }
    }
}

TEST(CsOperator, DotProductZeroAndIdentity) {
    const Scene s;
    const auto a = sensing::make_matrix(MatrixKind::bernoulli, 6, 16, 2);
    const sensing::CsOperator op(s.cfg, s.geometry, a);
    Rng rng(4);
    SourceImage f(s.grid);
    for (double& v : f.values()) v = rng.gaussian();
    const SensorData g = gaussian_data(6, s.cfg.time_axis, 5);
    const double lhs = dot(op.forward(f), g);
    EXPECT_NEAR(lhs, dot(f, op.adjoint(g)), 1e-10 * std::abs(lhs));
    EXPECT_EQ(norm2(op.adjoint(SensorData(6, s.cfg.time_axis))), 0.0);

    const SensorData full = gaussian_data(16, s.cfg.time_axis, 6);
    const SourceImage via_m = sensing::adjoint_M(full, sensing::identity_matrix(16), s.cfg, s.geometry);
    EXPECT_EQ(via_m, wave::adjoint_W(full, s.cfg, s.geometry));
    EXPECT_THROW(op.adjoint(full), ShapeError);
}

TEST(CsOperator, LinearInSource) {
    const Scene s;
    const auto a = sensing::make_matrix(MatrixKind::gaussian, 5, 16, 8);
    Rng rng(9);
    SourceImage f1(s.grid), f2(s.grid);
    for (double& v : f1.values()) v = rng.gaussian();
    for (double& v : f2.values()) v = rng.gaussian();
    const SensorData lhs = sensing::forward_M(f1 + 3.0 * f2, a, s.cfg, s.geometry);
    const SensorData rhs =
        sensing::forward_M(f1, a, s.cfg, s.geometry) + 3.0 * sensing::forward_M(f2, a, s.cfg, s.geometry);
    EXPECT_LE(norm2(lhs - rhs), 1e-10 * norm2(rhs));
}

TEST(Noise, ExactLevelAndSeeds) {
    const SensorData y = gaussian_data(20, TimeAxis(50, 1.0), 1);
    EXPECT_EQ(sensing::add_noise(y, 0.0, 3), y);
    const SensorData a = sensing::add_noise(y, 0.15, 3);
    const SensorData b = sensing::add_noise(y, 0.15, 4);
    EXPECT_NEAR(norm2(a - y) / norm2(y), 0.15, 1e-12);
    EXPECT_NEAR(norm2(b - y), norm2(a - y), 1e-12 * norm2(y));
    EXPECT_NE(a, b);
    EXPECT_EQ(sensing::add_noise(y, 0.15, 3), a);
    EXPECT_THROW(sensing::add_noise(y, -0.1, 3), ConfigError);
}

TEST(Matrix, SaveLoadRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "cspat_sensing_tests";
    std::filesystem::create_directories(dir);
    const auto a = sensing::make_matrix(MatrixKind::gaussian, 7, 12, 99);
    sensing::save_matrix(dir / "a.raw", a);
    EXPECT_EQ(sensing::load_matrix(dir / "a.raw"), a);
}
