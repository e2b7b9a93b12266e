#pragma once

#include "cspat/grid.hpp"
#include "cspat/image.hpp"
#include "cspat/sensor_data.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cspat::io {

// 8-bit grayscale raster, row-major, row 0 at the top of the file.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 255;
    std::vector<std::uint8_t> pixels;
};

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

// Linear map [min, max] -> [0, 255] written as P5, with a sidecar
// "<path>.json" holding {"min", "max", "width", "height"}. Row iy = ny-1 is
// written first so +y points up in viewers.
void write_image_pgm(const std::filesystem::path& path, const SourceImage& img);

// Dense row-major matrix of doubles.
struct RawArray {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<double> values;
};

// Raw dump: "CSPT", u32 rows, u32 cols, u32 reserved (0), then rows*cols
// little-endian IEEE-754 doubles.
void write_raw(const std::filesystem::path& path, const RawArray& array);
RawArray read_raw(const std::filesystem::path& path);

void write_raw(const std::filesystem::path& path, const SourceImage& img);
void write_raw(const std::filesystem::path& path, const SensorData& data);
SourceImage read_raw_image(const std::filesystem::path& path, const Grid2D& grid);
SensorData read_raw_sensor_data(const std::filesystem::path& path, const TimeAxis& axis);

} // namespace cspat::io
