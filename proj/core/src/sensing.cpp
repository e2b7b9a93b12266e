#include "cspat/sensing.hpp"

#include "cspat/error.hpp"
#include "cspat/io.hpp"
#include "cspat/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <string>

namespace cspat::sensing {

std::string_view to_string(MatrixKind kind) {
    switch (kind) {
    case MatrixKind::bernoulli: return "bernoulli";
    case MatrixKind::gaussian: return "gaussian";
    case MatrixKind::subsample: return "subsample";
    }
    return "unknown";
}

MatrixKind parse_matrix_kind(std::string_view name) {
    if (name == "bernoulli") return MatrixKind::bernoulli;
    if (name == "gaussian") return MatrixKind::gaussian;
    if (name == "subsample") return MatrixKind::subsample;
    throw ConfigError("unknown matrix kind '" + std::string(name) + "'");
}

MeasurementMatrix make_matrix(MatrixKind kind, std::size_t m, std::size_t n, std::uint64_t seed) {
    if (m < 1 || m > n) {
        throw ConfigError("measurement matrix needs 1 <= m <= n, got m=" + std::to_string(m) +
                          ", n=" + std::to_string(n));
    }
    MeasurementMatrix a{kind, m, n, seed, std::vector<double>(m * n, 0.0)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Rng rng(seed);
    switch (kind) {
    case MatrixKind::bernoulli:
        for (double& v : a.entries) v = scale * rng.sign();
        break;
    case MatrixKind::gaussian:
        for (double& v : a.entries) v = scale * rng.gaussian();
        break;
    case MatrixKind::subsample:
        for (std::size_t j = 0; j < m; ++j) a.entries[j * n + (j * n) / m] = 1.0;
        break;
    }
    return a;
}

MeasurementMatrix identity_matrix(std::size_t n) { return make_matrix(MatrixKind::subsample, n, n, 0); }

SensorData apply_A(const MeasurementMatrix& a, const SensorData& data) {
    if (data.rows() != a.n) {
        throw ShapeError("apply_A: matrix has " + std::to_string(a.n) + " columns, data has " +
                         std::to_string(data.rows()) + " rows");
    }
    SensorData out(a.m, data.time_axis());
    for (std::size_t j = 0; j < a.m; ++j) {
        auto o = out.row(j);
        for (std::size_t i = 0; i < a.n; ++i) {
            const double w = a(j, i);
            if (w == 0.0) continue;
            const auto d = data.row(i);
            for (std::size_t t = 0; t < o.size(); ++t) o[t] += w * d[t];
        }
    }
    return out;
}

SensorData apply_A_transpose(const MeasurementMatrix& a, const SensorData& data) {
    if (data.rows() != a.m) {
        throw ShapeError("apply_A_transpose: matrix has " + std::to_string(a.m) + " rows, data has " +
                         std::to_string(data.rows()) + " rows");
    }
    SensorData out(a.n, data.time_axis());
    for (std::size_t j = 0; j < a.m; ++j) {
        const auto d = data.row(j);
        for (std::size_t i = 0; i < a.n; ++i) {
            const double w = a(j, i);
            if (w == 0.0) continue;
            auto o = out.row(i);
            for (std::size_t t = 0; t < o.size(); ++t) o[t] += w * d[t];
        }
    }
    return out;
}

CsOperator::CsOperator(const wave::WaveConfig& cfg, const DetectorGeometry& geometry, MeasurementMatrix a)
    : propagator_(cfg, geometry), matrix_(std::move(a)) {
    if (matrix_.n != geometry.num_sensors()) {
        throw ShapeError("measurement matrix has " + std::to_string(matrix_.n) + " columns but geometry has " +
                         std::to_string(geometry.num_sensors()) + " sensors");
    }
}

SensorData CsOperator::forward(const SourceImage& f) const { return apply_A(matrix_, propagator_.forward(f)); }

SourceImage CsOperator::adjoint(const SensorData& data) const {
    return propagator_.adjoint(apply_A_transpose(matrix_, data));
}

SensorData forward_M(const SourceImage& f, const MeasurementMatrix& a, const wave::WaveConfig& cfg,
                     const DetectorGeometry& geometry) {
    return CsOperator(cfg, geometry, a).forward(f);
}

SourceImage adjoint_M(const SensorData& data, const MeasurementMatrix& a, const wave::WaveConfig& cfg,
                      const DetectorGeometry& geometry) {
    return CsOperator(cfg, geometry, a).adjoint(data);
}

SensorData add_noise(const SensorData& data, double level, std::uint64_t seed) {
    if (level < 0.0) throw ConfigError("noise level must be nonnegative");
    const double signal = norm2(data);
    if (level == 0.0 || signal == 0.0) return data;
    SensorData noise(data.rows(), data.time_axis());
    Rng rng(seed);
    for (double& v : noise.values()) v = rng.gaussian();
    noise *= level * signal / norm2(noise);
    return data + noise;
}

void save_matrix(const std::filesystem::path& path, const MeasurementMatrix& a) {
    io::write_raw(path, io::RawArray{static_cast<std::uint32_t>(a.m), static_cast<std::uint32_t>(a.n), a.entries});
    const nlohmann::json meta{{"kind", std::string(to_string(a.kind))}, {"m", a.m}, {"n", a.n}, {"seed", a.seed}};
    std::ofstream out(path.string() + ".json");
    if (!out) throw InputError("cannot write matrix metadata for '" + path.string() + "'");
    out << meta.dump(2) << '\n';
}

MeasurementMatrix load_matrix(const std::filesystem::path& path) {
    io::RawArray raw = io::read_raw(path);
    std::ifstream in(path.string() + ".json");
    if (!in) throw InputError("missing matrix metadata '" + path.string() + ".json'");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed matrix metadata '" + path.string() + ".json': " + e.what());
    }
    MeasurementMatrix a;
    a.kind = parse_matrix_kind(meta.at("kind").get<std::string>());
    a.m = meta.at("m").get<std::size_t>();
    a.n = meta.at("n").get<std::size_t>();
    a.seed = meta.at("seed").get<std::uint64_t>();
    if (raw.rows != a.m || raw.cols != a.n) throw InputError("matrix metadata does not match array shape");
    a.entries = std::move(raw.values);
    return a;
}

} // namespace cspat::sensing
