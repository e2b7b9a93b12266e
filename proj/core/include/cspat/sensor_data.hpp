#pragma once

#include "cspat/grid.hpp"

#include <span>
#include <vector>

namespace cspat {

// Time series per detector (or per compressed channel): rows x num_samples,
// row-major, one row per channel.
class SensorData {
public:
    SensorData(std::size_t rows, TimeAxis axis);
    SensorData(std::size_t rows, TimeAxis axis, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t num_samples() const { return axis_.num_samples(); }
    const TimeAxis& time_axis() const { return axis_; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::span<double> row(std::size_t r);
    std::span<const double> row(std::size_t r) const;

    double& operator()(std::size_t r, std::size_t k) { return values_[r * num_samples() + k]; }
    double operator()(std::size_t r, std::size_t k) const { return values_[r * num_samples() + k]; }

    bool all_finite() const;

    SensorData& operator+=(const SensorData& other);
    SensorData& operator-=(const SensorData& other);
    SensorData& operator*=(double s);

    friend bool operator==(const SensorData&, const SensorData&) = default;

private:
    std::size_t rows_;
    TimeAxis axis_;
    std::vector<double> values_;
};

SensorData operator+(SensorData a, const SensorData& b);
SensorData operator-(SensorData a, const SensorData& b);
SensorData operator*(double s, SensorData a);

double dot(const SensorData& a, const SensorData& b);
double norm2(const SensorData& a);

void require_same_shape(const SensorData& a, const SensorData& b, const char* what);

} // namespace cspat
