#include "cspat/figure.hpp"
#include "cspat/harness.hpp"
#include "cspat/io.hpp"
#include "cspat/phantom.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace cspat;
namespace fs = std::filesystem;

namespace {

void print_metrics(const harness::Report& r) {
    const harness::Metrics& m = r.metrics;
    std::printf("%s: %s error %.6f (psnr %.2f dB), fbp error %.6f, %zu iterations, %.1f s -> %s\n",
                r.manifest.name.c_str(), std::string(harness::to_string(r.manifest.solver)).c_str(),
                m.relative_l2_error, m.psnr, m.fbp_relative_l2_error, m.iterations, r.wall_seconds,
                r.output_dir.string().c_str());
}

int count_failures(const std::vector<harness::CellResult>& cells) {
    int failed = 0;
    for (const auto& c : cells) failed += c.ok ? 0 : 1;
    return failed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressed-sensing photoacoustic tomography"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for matrices and noise not fixed by a manifest");

    // phantom
    auto* ph = app.add_subcommand("phantom", "Write a phantom as PGM (plus .raw)");
    std::string ph_kind = "cross";
    std::string ph_image = CSPAT_DEFAULT_IMAGE;
    std::size_t ph_size = 128;
    fs::path ph_out = "phantom.pgm";
    ph->add_option("--kind", ph_kind, "cross | image")->check(CLI::IsMember({"cross", "image"}));
    ph->add_option("--image", ph_image, "Source PGM for --kind image");
    ph->add_option("--size", ph_size, "Grid nodes per side");
    ph->add_option("-o,--out", ph_out, "Output PGM");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate CS data y = A W f and y'' for a manifest");
    fs::path sim_manifest, sim_out = "sim";
    sim->add_option("manifest", sim_manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--out", sim_out, "Output directory");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "Run one manifest end to end");
    fs::path rec_manifest;
    std::string rec_out, rec_solver;
    bool rec_paper_threshold = false;
    rec->add_option("manifest", rec_manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    rec->add_option("-o,--out", rec_out, "Override the output directory");
    rec->add_option("--solver", rec_solver, "Override the solver")->check(CLI::IsMember({"joint", "two_stage", "fbp"}));
    rec->add_flag("--paper-thresholding", rec_paper_threshold, "Soft-threshold h by beta instead of mu*beta");

    // grid
    auto* grid = app.add_subcommand("grid", "Run the six-cell experiment grid");
    std::string profile = "small";
    fs::path grid_out = "runs";
    std::string grid_image = CSPAT_DEFAULT_IMAGE;
    bool grid_paper_threshold = false;
    std::optional<std::size_t> grid_iters;
    grid->add_option("--profile", profile, "small | paper")->check(CLI::IsMember({"small", "paper"}));
    grid->add_option("-o,--out", grid_out, "Root directory for the cells");
    grid->add_option("--image", grid_image, "Image phantom for the image cell");
    grid->add_flag("--paper-thresholding", grid_paper_threshold, "Soft-threshold h by beta instead of mu*beta");
    grid->add_option("--iterations", grid_iters, "Override the profile's iteration budget");

    // freeze-baselines
    auto* frz = app.add_subcommand("freeze-baselines", "Run the grid and store its errors as regression ceilings");
    fs::path frz_out = "data/baselines.json", frz_runs = "runs";
    double slack = 0.02;
    frz->add_option("--profile", profile, "small | paper")->check(CLI::IsMember({"small", "paper"}));
    frz->add_option("-o,--out", frz_out, "Baseline JSON (other profiles are kept)");
    frz->add_option("--runs", frz_runs, "Directory for the grid runs");
    frz->add_option("--image", grid_image, "Image phantom for the image cell");
    frz->add_option("--slack", slack, "Relative headroom above the measured error");

    // figure
    auto* fig = app.add_subcommand("figure", "Render a figure from a run directory");
    fs::path fig_run, fig_out;
    std::string fig_kind = "recon_pair";
    fig->add_option("run", fig_run, "Run directory")->required()->check(CLI::ExistingDirectory);
    fig->add_option("--kind", fig_kind, "recon_pair | convergence")
        ->check(CLI::IsMember({"recon_pair", "convergence"}));
    fig->add_option("-o,--out", fig_out, "Output file (default <run>/<kind>.pgm|svg)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ph) {
            const Grid2D g = Grid2D::centered(ph_size, ph_size, 1.0);
            const DetectorGeometry geom({0.0, 0.0}, 0.35 * static_cast<double>(ph_size - 1), 1);
            const SourceImage img =
                ph_kind == "cross" ? make_cross_phantom(g, geom) : load_image_phantom(ph_image, g, geom);
            io::write_image_pgm(ph_out, img);
            fs::path raw = ph_out;
            io::write_raw(raw.replace_extension(".raw"), img);
            std::printf("wrote %s\n", ph_out.string().c_str());
        } else if (*sim) {
            const harness::ExperimentManifest mf = harness::resolve(harness::load_manifest(sim_manifest), seed);
            const harness::Setup setup = harness::make_setup(mf);
            const SourceImage f = harness::make_phantom(mf, setup);
            const auto a = sensing::make_matrix(mf.matrix, mf.m, mf.num_sensors, *mf.matrix_seed);
            const sensing::CsOperator op(setup.wave, setup.geometry, a);
            SensorData y = op.forward(f);
            if (mf.noise_level > 0.0) y = sensing::add_noise(y, mf.noise_level, *mf.noise_seed);
            fs::create_directories(sim_out);
            io::write_raw(sim_out / "y.raw", y);
            io::write_raw(sim_out / "y2.raw", wave::second_time_derivative(y));
            io::write_raw(sim_out / "truth.raw", f);
            sensing::save_matrix(sim_out / "matrix.raw", a);
            harness::save_manifest(sim_out / "manifest.json", mf);
            std::printf("wrote %zu x %zu CS data to %s\n", y.rows(), y.num_samples(), sim_out.string().c_str());
        } else if (*rec) {
            harness::ExperimentManifest mf = harness::load_manifest(rec_manifest);
            if (!rec_out.empty()) mf.output_dir = rec_out;
            if (!rec_solver.empty()) mf.solver = harness::parse_solver_kind(rec_solver);
            if (rec_paper_threshold) mf.recon.paper_thresholding = true;
            print_metrics(harness::run_experiment(mf, seed));
        } else if (*grid) {
            harness::GridOptions opt{seed, grid_paper_threshold, grid_iters, true};
            const auto cells = harness::run_paper_grid(harness::parse_profile(profile), grid_out, grid_image, opt);
            std::printf("summary: %s\n", (grid_out / "summary.csv").string().c_str());
            return count_failures(cells) == 0 ? 0 : 1;
        } else if (*frz) {
            harness::GridOptions opt{seed, false, std::nullopt, true};
            const harness::Profile p = harness::parse_profile(profile);
            const auto cells = harness::run_paper_grid(p, frz_runs, grid_image, opt);
            if (count_failures(cells) != 0) {
                std::fprintf(stderr, "not freezing: some cells failed\n");
                return 1;
            }
            harness::freeze_baselines(frz_out, p, cells, slack);
            std::printf("wrote %s\n", frz_out.string().c_str());
        } else if (*fig) {
            const auto kind = figure::parse_figure_kind(fig_kind);
            if (fig_out.empty()) fig_out = fig_run / (fig_kind + (kind == figure::FigureKind::recon_pair ? ".pgm" : ".svg"));
            figure::emit_figure(fig_run, kind, fig_out);
            std::printf("wrote %s\n", fig_out.string().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
