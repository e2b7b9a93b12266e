#include "cspat/io.hpp"

#include "cspat/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace cspat::io {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'S', 'P', 'T'};

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::filesystem::path& path) {
    std::string token;
    char ch = 0;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string discard;
            std::getline(in, discard);
            if (!token.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(ch);
    }
    if (token.empty()) throw InputError("truncated PGM header in " + describe(path));
    return token;
}

std::size_t header_number(std::istream& in, const std::filesystem::path& path) {
    const std::string token = header_token(in, path);
    if (!std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw InputError("malformed PGM header field '" + token + "' in " + describe(path));
    }
    return static_cast<std::size_t>(std::stoul(token));
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                    static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> bytes{};
    for (auto& b : bytes) {
        b = static_cast<char>(bits & 0xff);
        bits >>= 8;
    }
    out.write(bytes.data(), 8);
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
    return std::bit_cast<double>(bits);
}

} // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open image " + describe(path));
    if (header_token(in, path) != "P5") {
        throw InputError("unsupported image format in " + describe(path) + " (expected binary PGM 'P5')");
    }
    GrayImage img;
    img.width = header_number(in, path);
    img.height = header_number(in, path);
    const std::size_t maxval = header_number(in, path);
    if (img.width == 0 || img.height == 0) throw InputError("empty PGM image in " + describe(path));
    if (maxval == 0 || maxval > 255) {
        throw InputError("only 8-bit PGM is supported, maxval " + std::to_string(maxval) + " in " + describe(path));
    }
    img.maxval = static_cast<unsigned>(maxval);
    img.pixels.resize(img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw InputError("truncated PGM pixel data in " + describe(path));
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write image " + describe(path));
    out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

void write_image_pgm(const std::filesystem::path& path, const SourceImage& img) {
    const Grid2D& g = img.grid();
    const double lo = img.min();
    const double hi = img.max();
    const double range = hi - lo;
    GrayImage out;
    out.width = g.nx();
    out.height = g.ny();
    out.pixels.resize(g.size());
    for (std::size_t row = 0; row < g.ny(); ++row) {
        const std::size_t iy = g.ny() - 1 - row;
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
            const double t = range > 0.0 ? (img(ix, iy) - lo) / range : 0.0;
            out.pixels[row * g.nx() + ix] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
        }
    }
    write_pgm(path, out);

    const nlohmann::json sidecar{{"min", lo}, {"max", hi}, {"width", g.nx()}, {"height", g.ny()}};
    std::ofstream meta(path.string() + ".json");
    meta << sidecar.dump(2) << '\n';
}

void write_raw(const std::filesystem::path& path, const RawArray& array) {
    if (array.values.size() != static_cast<std::size_t>(array.rows) * array.cols) {
        throw ShapeError("raw array value count does not match its header");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write raw array " + describe(path));
    out.write(kMagic.data(), 4);
    put_u32(out, array.rows);
    put_u32(out, array.cols);
    put_u32(out, 0);
    for (double v : array.values) put_f64(out, v);
}

RawArray read_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open raw array " + describe(path));
    std::array<unsigned char, 16> header{};
    in.read(reinterpret_cast<char*>(header.data()), 16);
    if (in.gcount() != 16 || std::memcmp(header.data(), kMagic.data(), 4) != 0) {
        throw InputError("not a CSPT raw array: " + describe(path));
    }
    RawArray array;
    array.rows = get_u32(header.data() + 4);
    array.cols = get_u32(header.data() + 8);
    const std::size_t count = static_cast<std::size_t>(array.rows) * array.cols;
    std::vector<unsigned char> bytes(count * 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw InputError("truncated raw array " + describe(path));
    }
    array.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) array.values[k] = get_f64(bytes.data() + 8 * k);
    return array;
}

void write_raw(const std::filesystem::path& path, const SourceImage& img) {
    const auto v = img.values();
    write_raw(path, RawArray{static_cast<std::uint32_t>(img.grid().ny()), static_cast<std::uint32_t>(img.grid().nx()),
                             std::vector<double>(v.begin(), v.end())});
}

void write_raw(const std::filesystem::path& path, const SensorData& data) {
    const auto v = data.values();
    write_raw(path, RawArray{static_cast<std::uint32_t>(data.rows()), static_cast<std::uint32_t>(data.num_samples()),
                             std::vector<double>(v.begin(), v.end())});
}

SourceImage read_raw_image(const std::filesystem::path& path, const Grid2D& grid) {
    RawArray a = read_raw(path);
    if (a.rows != grid.ny() || a.cols != grid.nx()) {
        throw ShapeError("raw image " + describe(path) + " is " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + ", grid expects " + std::to_string(grid.ny()) + "x" +
                         std::to_string(grid.nx()));
    }
    return SourceImage(grid, std::move(a.values));
}

SensorData read_raw_sensor_data(const std::filesystem::path& path, const TimeAxis& axis) {
    RawArray a = read_raw(path);
    if (a.cols != axis.num_samples()) {
        throw ShapeError("raw sensor data " + describe(path) + " has " + std::to_string(a.cols) +
                         " samples, time axis expects " + std::to_string(axis.num_samples()));
    }
    return SensorData(a.rows, axis, std::move(a.values));
}

} // namespace cspat::io
