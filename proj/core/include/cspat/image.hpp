#pragma once

#include "cspat/grid.hpp"

#include <span>
#include <vector>

namespace cspat {

// Real scalar field on a Grid2D. Used for the source f, the modified source h
// and the sound-speed map c.
class SourceImage {
public:
    explicit SourceImage(Grid2D grid);
    SourceImage(Grid2D grid, double fill);
    SourceImage(Grid2D grid, std::vector<double> values);

    const Grid2D& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    double& operator()(std::size_t ix, std::size_t iy) { return values_[grid_.index(ix, iy)]; }
    double operator()(std::size_t ix, std::size_t iy) const { return values_[grid_.index(ix, iy)]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    bool all_finite() const;
    double min() const;
    double max() const;

    SourceImage& operator+=(const SourceImage& other);
    SourceImage& operator-=(const SourceImage& other);
    SourceImage& operator*=(double s);

    // this += s * other
    void axpy(double s, const SourceImage& other);

    friend bool operator==(const SourceImage&, const SourceImage&) = default;

private:
    Grid2D grid_;
    std::vector<double> values_;
};

SourceImage operator+(SourceImage a, const SourceImage& b);
SourceImage operator-(SourceImage a, const SourceImage& b);
SourceImage operator*(double s, SourceImage a);

// Pixelwise product and quotient.
SourceImage hadamard(SourceImage a, const SourceImage& b);
SourceImage divide(SourceImage a, const SourceImage& b);

double dot(const SourceImage& a, const SourceImage& b);
double norm2(const SourceImage& a);
double norm1(const SourceImage& a);

// Throws ShapeError if the grids differ.
void require_same_grid(const SourceImage& a, const SourceImage& b, const char* what);

// 5-point stencil with zero padding outside the grid, scaled by 1/spacing^2.
// Symmetric as an operator on the node values.
SourceImage discrete_laplacian(const SourceImage& img);

// ||a - b|| / ||b||, or ||a|| when b vanishes.
double relative_l2_error(const SourceImage& a, const SourceImage& b);

// Peak signal-to-noise ratio in dB with peak = max |reference|.
double psnr(const SourceImage& recon, const SourceImage& reference);

} // namespace cspat
