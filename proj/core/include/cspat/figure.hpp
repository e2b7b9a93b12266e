#pragma once

#include "cspat/image.hpp"
#include "cspat/recon.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cspat::figure {

enum class FigureKind { recon_pair, convergence };

FigureKind parse_figure_kind(std::string_view name);

inline constexpr std::size_t kMontageSeparator = 4;

// Side-by-side PGM, left | white bar | right, both on one gray scale.
void write_montage(const std::filesystem::path& path, const SourceImage& left, const SourceImage& right);

// SVG with one polyline per history column (log-scaled y). Each polyline
// carries its column name and raw values in data-series / data-values.
std::string convergence_svg(const std::vector<recon::HistoryEntry>& history);

// Builds a figure from the files run_experiment left in run_dir.
void emit_figure(const std::filesystem::path& run_dir, FigureKind kind, const std::filesystem::path& out);

} // namespace cspat::figure
