#include "cspat/figure.hpp"
#include "cspat/error.hpp"
#include "cspat/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cspat::figure {

FigureKind parse_figure_kind(std::string_view name) {
    if (name == "recon_pair") return FigureKind::recon_pair;
    if (name == "convergence") return FigureKind::convergence;
    throw ConfigError("unknown figure kind '" + std::string(name) + "' (recon_pair|convergence)");
}

void write_montage(const std::filesystem::path& path, const SourceImage& left, const SourceImage& right) {
    require_same_grid(left, right, "montage");
    const std::size_t nx = left.grid().nx();
    const std::size_t ny = left.grid().ny();
    const double lo = std::min(left.min(), right.min());
    const double hi = std::max(left.max(), right.max());
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

    io::GrayImage img;
    img.width = 2 * nx + kMontageSeparator;
    img.height = ny;
    img.pixels.assign(img.width * img.height, 255);
    auto put = [&](const SourceImage& src, std::size_t x0) {
        for (std::size_t row = 0; row < ny; ++row) {
            const std::size_t iy = ny - 1 - row;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double v = std::clamp((src(ix, iy) - lo) * scale, 0.0, 255.0);
                img.pixels[row * img.width + x0 + ix] = static_cast<std::uint8_t>(std::lround(v));
            }
        }
    };
    put(left, 0);
    put(right, nx + kMontageSeparator);
    io::write_pgm(path, img);
}

std::string convergence_svg(const std::vector<recon::HistoryEntry>& history) {
    struct Series {
        const char* name;
        const char* color;
        double recon::HistoryEntry::*field;
    };
    const Series series[] = {
        {"objective", "#000000", &recon::HistoryEntry::objective},
        {"data_f_residual", "#1f77b4", &recon::HistoryEntry::data_f_residual},
        {"data_h_residual", "#ff7f0e", &recon::HistoryEntry::data_h_residual},
        {"coupling_residual", "#2ca02c", &recon::HistoryEntry::coupling_residual},
        {"l1_term", "#d62728", &recon::HistoryEntry::l1_term},
    };
    constexpr double width = 640, height = 400, margin = 50;

    // Log axis over the positive values of every series.
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (const auto& e : history) {
        for (const Series& s : series) {
            const double v = e.*s.field;
            if (v > 0.0 && std::isfinite(v)) {
                lo = std::min(lo, std::log10(v));
                hi = std::max(hi, std::log10(v));
            }
        }
    }
    if (!(hi >= lo)) lo = hi = 0.0;
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double it_max = history.empty() ? 1.0 : std::max<double>(1.0, static_cast<double>(history.back().iteration));

    std::ostringstream svg;
    svg.precision(17);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">objective history (log10)</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    for (const Series& s : series) {
        std::ostringstream points, values;
        points.precision(6);
        values.precision(17);
        for (std::size_t i = 0; i < history.size(); ++i) {
            const double v = history[i].*s.field;
            values << (i ? " " : "") << v;
            const double ly = v > 0.0 && std::isfinite(v) ? std::log10(v) : lo;
            const double px = margin + (width - 2 * margin) * static_cast<double>(history[i].iteration) / it_max;
            const double py = height - margin - (height - 2 * margin) * (ly - lo) / (hi - lo);
            points << (i ? " " : "") << px << ',' << py;
        }
        svg << "<polyline data-series=\"" << s.name << "\" data-values=\"" << values.str() << "\" points=\""
            << points.str() << "\" fill=\"none\" stroke=\"" << s.color << "\"/>\n";
    }
    double ly = margin + 10;
    for (const Series& s : series) {
        svg << "<text x=\"" << width - margin - 150 << "\" y=\"" << ly << "\" fill=\"" << s.color << "\">" << s.name
            << "</text>\n";
        ly += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_figure(const std::filesystem::path& run_dir, FigureKind kind, const std::filesystem::path& out) {
    if (kind == FigureKind::recon_pair) {
        const auto rec_path = run_dir / "reconstruction.raw";
        const auto fbp_path = run_dir / "fbp.raw";
        for (const auto& p : {rec_path, fbp_path}) {
            if (!std::filesystem::exists(p)) throw InputError("missing " + p.string());
        }
        const io::RawArray rec = io::read_raw(rec_path);
        const io::RawArray fbp = io::read_raw(fbp_path);
        const Grid2D grid = Grid2D::centered(rec.cols, rec.rows, 1.0);
        if (fbp.rows != rec.rows || fbp.cols != rec.cols) throw ShapeError("reconstruction and fbp sizes differ");
        write_montage(out, SourceImage(grid, rec.values), SourceImage(grid, fbp.values));
        return;
    }
    const auto hist_path = run_dir / "history.csv";
    std::ifstream in(hist_path);
    if (!in) throw InputError("missing " + hist_path.string());
    const std::string svg = convergence_svg(recon::read_history_csv(in));
    std::ofstream o(out);
    if (!o) throw InputError("cannot write " + out.string());
    o << svg;
}

} // namespace cspat::figure
