#include "cspat/sensor_data.hpp"

#include "cspat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cspat {

SensorData::SensorData(std::size_t rows, TimeAxis axis)
    : rows_(rows), axis_(axis), values_(rows * axis.num_samples(), 0.0) {
    if (rows < 1) throw ShapeError("sensor data needs at least one row");
}

SensorData::SensorData(std::size_t rows, TimeAxis axis, std::vector<double> values)
    : rows_(rows), axis_(axis), values_(std::move(values)) {
    if (rows < 1) throw ShapeError("sensor data needs at least one row");
    if (values_.size() != rows * axis.num_samples()) {
        throw ShapeError("sensor data value count " + std::to_string(values_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(axis.num_samples()));
    }
}

std::span<double> SensorData::row(std::size_t r) {
    return std::span<double>(values_).subspan(r * num_samples(), num_samples());
}

std::span<const double> SensorData::row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * num_samples(), num_samples());
}

bool SensorData::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SensorData& SensorData::operator+=(const SensorData& other) {
    require_same_shape(*this, other, "sensor data +=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

SensorData& SensorData::operator-=(const SensorData& other) {
    require_same_shape(*this, other, "sensor data -=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

SensorData& SensorData::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

SensorData operator+(SensorData a, const SensorData& b) { return a += b; }
SensorData operator-(SensorData a, const SensorData& b) { return a -= b; }
SensorData operator*(double s, SensorData a) { return a *= s; }

double dot(const SensorData& a, const SensorData& b) {
    require_same_shape(a, b, "sensor data dot");
    return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}

double norm2(const SensorData& a) { return std::sqrt(dot(a, a)); }

void require_same_shape(const SensorData& a, const SensorData& b, const char* what) {
    if (a.rows() != b.rows() || !(a.time_axis() == b.time_axis())) {
        throw ShapeError(std::string(what) + ": shapes differ (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.num_samples()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.num_samples()) + ")");
    }
}

} // namespace cspat
