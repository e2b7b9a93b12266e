#include "cspat/image.hpp"

#include "cspat/error.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>

namespace cspat {

SourceImage::SourceImage(Grid2D grid) : grid_(grid), values_(grid.size(), 0.0) {}

SourceImage::SourceImage(Grid2D grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

SourceImage::SourceImage(Grid2D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ShapeError("image value count " + std::to_string(values_.size()) + " does not match grid size " +
                         std::to_string(grid_.size()));
    }
    if (!all_finite()) throw NumericalError("image values must be finite");
}

bool SourceImage::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double SourceImage::min() const { return *std::min_element(values_.begin(), values_.end()); }
double SourceImage::max() const { return *std::max_element(values_.begin(), values_.end()); }

SourceImage& SourceImage::operator+=(const SourceImage& other) {
    axpy(1.0, other);
    return *this;
}

SourceImage& SourceImage::operator-=(const SourceImage& other) {
    axpy(-1.0, other);
    return *this;
}

SourceImage& SourceImage::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

void SourceImage::axpy(double s, const SourceImage& other) {
    require_same_grid(*this, other, "axpy");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
}

SourceImage operator+(SourceImage a, const SourceImage& b) { return a += b; }
SourceImage operator-(SourceImage a, const SourceImage& b) { return a -= b; }
SourceImage operator*(double s, SourceImage a) { return a *= s; }

SourceImage hadamard(SourceImage a, const SourceImage& b) {
    require_same_grid(a, b, "hadamard");
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k];
    return a;
}

SourceImage divide(SourceImage a, const SourceImage& b) {
    require_same_grid(a, b, "divide");
    for (std::size_t k = 0; k < a.size(); ++k) a[k] /= b[k];
    return a;
}

double dot(const SourceImage& a, const SourceImage& b) {
    require_same_grid(a, b, "dot");
    return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}

double norm2(const SourceImage& a) { return std::sqrt(dot(a, a)); }

double norm1(const SourceImage& a) {
    double s = 0.0;
    for (double v : a.values()) s += std::abs(v);
    return s;
}

void require_same_grid(const SourceImage& a, const SourceImage& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        throw ShapeError(std::string(what) + ": image grids differ (" + std::to_string(a.grid().nx()) + "x" +
                         std::to_string(a.grid().ny()) + " vs " + std::to_string(b.grid().nx()) + "x" +
                         std::to_string(b.grid().ny()) + ")");
    }
}

SourceImage discrete_laplacian(const SourceImage& img) {
    const Grid2D& g = img.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double scale = 1.0 / (g.spacing() * g.spacing());
    SourceImage out(g);
    const auto in = img.values();
    auto o = out.values();
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t k = iy * nx + ix;
            double s = -4.0 * in[k];
            if (ix > 0) s += in[k - 1];
            if (ix + 1 < nx) s += in[k + 1];
            if (iy > 0) s += in[k - nx];
            if (iy + 1 < ny) s += in[k + nx];
            o[k] = s * scale;
        }
    }
    return out;
}

double relative_l2_error(const SourceImage& a, const SourceImage& b) {
    require_same_grid(a, b, "relative_l2_error");
    const double nb = norm2(b);
    if (nb == 0.0) return norm2(a);
    return norm2(a - b) / nb;
}

double psnr(const SourceImage& recon, const SourceImage& reference) {
    require_same_grid(recon, reference, "psnr");
    double peak = 0.0;
    for (double v : reference.values()) peak = std::max(peak, std::abs(v));
    const double mse = std::pow(norm2(recon - reference), 2) / static_cast<double>(recon.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

} // namespace cspat
