#pragma once

#include "cspat/image.hpp"
#include "cspat/sensor_data.hpp"
#include "cspat/wave.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cspat::sensing {

enum class MatrixKind { bernoulli, gaussian, subsample };

std::string_view to_string(MatrixKind kind);
MatrixKind parse_matrix_kind(std::string_view name);

// Dense m x n compression matrix, row-major.
struct MeasurementMatrix {
    MatrixKind kind = MatrixKind::bernoulli;
    std::size_t m = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<double> entries;

    double operator()(std::size_t row, std::size_t col) const { return entries[row * n + col]; }

    friend bool operator==(const MeasurementMatrix&, const MeasurementMatrix&) = default;
};

// bernoulli: +-1/sqrt(m) with equal probability; gaussian: N(0, 1/m);
// subsample: row j picks sensor floor(j n / m). Requires 1 <= m <= n.
MeasurementMatrix make_matrix(MatrixKind kind, std::size_t m, std::size_t n, std::uint64_t seed);

// Identity-like m = n subsample matrix (full data).
MeasurementMatrix identity_matrix(std::size_t n);

SensorData apply_A(const MeasurementMatrix& a, const SensorData& data);
SensorData apply_A_transpose(const MeasurementMatrix& a, const SensorData& data);

// Compressed wave operator M = A W with its adjoint W* A^T. Holds a
// Propagator so repeated applications reuse the precomputed coefficients.
class CsOperator {
public:
    CsOperator(const wave::WaveConfig& cfg, const DetectorGeometry& geometry, MeasurementMatrix a);

    const wave::Propagator& propagator() const { return propagator_; }
    const MeasurementMatrix& matrix() const { return matrix_; }
    const Grid2D& grid() const { return propagator_.grid(); }
    const TimeAxis& time_axis() const { return propagator_.config().time_axis; }

    SensorData forward(const SourceImage& f) const;
    SourceImage adjoint(const SensorData& data) const;

private:
    wave::Propagator propagator_;
    MeasurementMatrix matrix_;
};

SensorData forward_M(const SourceImage& f, const MeasurementMatrix& a, const wave::WaveConfig& cfg,
                     const DetectorGeometry& geometry);
SourceImage adjoint_M(const SensorData& data, const MeasurementMatrix& a, const wave::WaveConfig& cfg,
                      const DetectorGeometry& geometry);

// data + e with e i.i.d. Gaussian rescaled so that ||e|| = level * ||data||.
SensorData add_noise(const SensorData& data, double level, std::uint64_t seed);

// Matrix entries as a raw array plus "<path>.json" = {kind, m, n, seed}.
void save_matrix(const std::filesystem::path& path, const MeasurementMatrix& a);
MeasurementMatrix load_matrix(const std::filesystem::path& path);

} // namespace cspat::sensing
