#pragma once

#include "cspat/error.hpp"
#include "cspat/grid.hpp"
#include "cspat/image.hpp"
#include "cspat/recon.hpp"
#include "cspat/sensing.hpp"
#include "cspat/wave.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cspat::harness {

enum class PhantomKind { cross, image };
enum class SolverKind { joint, two_stage, fbp };

std::string_view to_string(PhantomKind kind);
std::string_view to_string(SolverKind kind);
PhantomKind parse_phantom_kind(std::string_view name);
SolverKind parse_solver_kind(std::string_view name);

// One end-to-end run. Optional fields are filled by resolve().
struct ExperimentManifest {
    std::string name = "experiment";
    PhantomKind phantom = PhantomKind::cross;
    std::filesystem::path phantom_path; // image phantoms only

    std::size_t grid_size = 64;
    std::optional<double> radius;       // default 0.35 (grid_size - 1)
    std::size_t num_sensors = 100;
    double coverage = 2.0 * 3.14159265358979323846;
    double start_angle = 0.0;
    std::size_t time_samples = 301;     // on [0, 2R]

    sensing::MatrixKind matrix = sensing::MatrixKind::bernoulli;
    std::size_t m = 25;
    std::optional<std::uint64_t> matrix_seed;

    double noise_level = 0.0;           // ||e|| / ||y||
    std::optional<std::uint64_t> noise_seed;

    SolverKind solver = SolverKind::joint;
    recon::ReconConfig recon;
    std::filesystem::path output_dir = "run";

    friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

// Fills radius and seeds (matrix_seed = seed, noise_seed = seed + 1).
ExperimentManifest resolve(ExperimentManifest manifest, std::uint64_t seed);

std::string to_json(const ExperimentManifest& manifest);
ExperimentManifest manifest_from_json(std::string_view text);

// Relative phantom paths are taken relative to the manifest's directory and
// must exist.
ExperimentManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const ExperimentManifest& manifest);

// Thrown by run_experiment; what() starts with the failing stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Grid, detectors and normalized wave configuration of a resolved manifest.
struct Setup {
    Grid2D grid;
    DetectorGeometry geometry;
    wave::WaveConfig wave;
    double operator_norm = 1.0;
};

Setup make_setup(const ExperimentManifest& manifest);
SourceImage make_phantom(const ExperimentManifest& manifest, const Setup& setup);

struct Metrics {
    double relative_l2_error = 0.0;
    double psnr = 0.0;
    double fbp_relative_l2_error = 0.0; // FBP on A^T y, always computed
    double fbp_psnr = 0.0;
    std::size_t iterations = 0;
    double final_objective = 0.0;
    double operator_norm = 0.0;
};

std::string to_json(const Metrics& metrics);
Metrics metrics_from_json(std::string_view text);

struct Report {
    ExperimentManifest manifest; // resolved
    Metrics metrics;
    double wall_seconds = 0.0;
    std::filesystem::path output_dir;
};

// Writes into manifest.output_dir: manifest.json (resolved), metrics.json,
// timing.json, history.csv, truth/reconstruction/fbp as .pgm and .raw.
// Deterministic apart from timing.json.
Report run_experiment(const ExperimentManifest& manifest, std::uint64_t seed = 0);

enum class Profile { small, paper };
std::string_view to_string(Profile profile);
Profile parse_profile(std::string_view name);

// The six joint-vs-FBP cells: full data, m = 10% and 25% noise-free,
// the image phantom at 33%, and 10% / 25% with 15% noise. The small profile
// halves the grid and sensor count and runs 2000 iterations.
std::vector<ExperimentManifest> paper_grid(Profile profile, const std::filesystem::path& root,
                                           const std::filesystem::path& image_phantom);

struct CellResult {
    std::string name;
    bool ok = false;
    std::string error;
    Report report;
};

struct GridOptions {
    std::uint64_t seed = 0;
    bool paper_thresholding = false;
    std::optional<std::size_t> max_iters; // overrides the profile's budget
    bool verbose = false;
};

// Runs every cell, continuing past failures, and writes summary.csv under root.
std::vector<CellResult> run_paper_grid(Profile profile, const std::filesystem::path& root,
                                       const std::filesystem::path& image_phantom,
                                       const GridOptions& options = {});

void write_summary_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells);

// Frozen per-cell error ceilings: {"<profile>": {"<cell>": {"joint_error",
// "fbp_error", "joint_threshold"}}} with threshold = error * (1 + slack).
struct Baseline {
    double joint_error = 0.0;
    double fbp_error = 0.0;
    double joint_threshold = 0.0;
};

void freeze_baselines(const std::filesystem::path& path, Profile profile, const std::vector<CellResult>& cells,
                      double slack = 0.02);
std::optional<Baseline> load_baseline(const std::filesystem::path& path, Profile profile, std::string_view cell);

} // namespace cspat::harness
