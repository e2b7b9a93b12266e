#include "cspat/harness.hpp"
#include "cspat/io.hpp"
#include "cspat/phantom.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cspat::harness {

using Json = nlohmann::ordered_json;

StageError::StageError(std::string stage, const std::string& message)
    : Error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}

namespace {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

Setup make_setup(const ExperimentManifest& manifest) {
    if (!manifest.radius) throw ConfigError("manifest is not resolved (radius missing)");
    Grid2D grid = Grid2D::centered(manifest.grid_size, manifest.grid_size, 1.0);
    DetectorGeometry geometry({0.0, 0.0}, *manifest.radius, manifest.num_sensors, manifest.coverage,
                              manifest.start_angle);
    geometry.validate_within(grid);
    wave::Sponge sponge;
    sponge.width = wave::default_sponge_width(grid, geometry);
    wave::WaveConfig cfg =
        wave::WaveConfig::uniform(grid, 1.0, TimeAxis(manifest.time_samples, 2.0 * *manifest.radius), sponge);
    const double norm = wave::estimate_operator_norm(cfg, geometry);
    cfg.data_scale = 1.0 / norm;
    return Setup{grid, geometry, std::move(cfg), norm};
}

SourceImage make_phantom(const ExperimentManifest& manifest, const Setup& setup) {
    if (manifest.phantom == PhantomKind::cross) return make_cross_phantom(setup.grid, setup.geometry);
    return load_image_phantom(manifest.phantom_path, setup.grid, setup.geometry);
}

Report run_experiment(const ExperimentManifest& input, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentManifest mf = resolve(input, seed);
    mf.recon.validate();

    const Setup setup = stage("setup", [&] { return make_setup(mf); });
    const SourceImage truth = stage("phantom", [&] { return make_phantom(mf, setup); });

    const sensing::MeasurementMatrix a =
        stage("matrix", [&] { return sensing::make_matrix(mf.matrix, mf.m, mf.num_sensors, *mf.matrix_seed); });
    const sensing::CsOperator op(setup.wave, setup.geometry, a);

    SensorData y = stage("simulate", [&] { return op.forward(truth); });
    if (mf.noise_level > 0.0) y = stage("noise", [&] { return sensing::add_noise(y, mf.noise_level, *mf.noise_seed); });
    const SensorData y2 = stage("derivative", [&] { return wave::second_time_derivative(y); });

    const SourceImage fbp = stage("fbp", [&] {
        return recon::fbp_reconstruct(sensing::apply_A_transpose(a, y), setup.geometry, setup.wave);
    });

    SourceImage rec(setup.grid);
    std::vector<recon::HistoryEntry> history;
    std::size_t iterations = 0;
    stage("solve", [&] {
        switch (mf.solver) {
        case SolverKind::joint: {
            const recon::JointProblem problem(op, y, y2);
            recon::JointState st = recon::solve_joint(problem, mf.recon);
            rec = std::move(st.f);
            history = std::move(st.history);
            iterations = st.iteration;
            break;
        }
        case SolverKind::two_stage: {
            recon::TwoStageResult r = recon::solve_l1_then_poisson(op, y2, mf.recon);
            rec = std::move(r.f);
            history = std::move(r.history);
            iterations = history.empty() ? 0 : history.back().iteration;
            break;
        }
        case SolverKind::fbp:
            rec = fbp;
            break;
        }
    });

    Metrics metrics;
    metrics.relative_l2_error = relative_l2_error(rec, truth);
    metrics.psnr = psnr(rec, truth);
    metrics.fbp_relative_l2_error = relative_l2_error(fbp, truth);
    metrics.fbp_psnr = psnr(fbp, truth);
    metrics.iterations = iterations;
    metrics.final_objective = history.empty() ? 0.0 : history.back().objective;
    metrics.operator_norm = setup.operator_norm;

    const std::filesystem::path dir = mf.output_dir;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage("write", [&] {
        std::filesystem::create_directories(dir);
        save_manifest(dir / "manifest.json", mf);
        write_text(dir / "metrics.json", to_json(metrics));
        write_text(dir / "timing.json", Json{{"wall_seconds", wall}}.dump(2) + "\n");
        std::ofstream hist(dir / "history.csv");
        recon::write_history_csv(hist, history);
        io::write_image_pgm(dir / "truth.pgm", truth);
        io::write_image_pgm(dir / "reconstruction.pgm", rec);
        io::write_image_pgm(dir / "fbp.pgm", fbp);
        io::write_raw(dir / "truth.raw", truth);
        io::write_raw(dir / "reconstruction.raw", rec);
        io::write_raw(dir / "fbp.raw", fbp);
    });
    return Report{mf, metrics, wall, dir};
}

std::string_view to_string(Profile profile) { return profile == Profile::small ? "small" : "paper"; }

Profile parse_profile(std::string_view name) {
    if (name == "small") return Profile::small;
    if (name == "paper") return Profile::paper;
    throw ConfigError("unknown profile '" + std::string(name) + "' (small|paper)");
}

std::vector<ExperimentManifest> paper_grid(Profile profile, const std::filesystem::path& root,
                                           const std::filesystem::path& image_phantom) {
    const bool paper = profile == Profile::paper;
    const std::size_t n = paper ? 200 : 100;
    struct Cell {
        const char* name;
        bool image;
        std::size_t m; // out of 200
        double noise;
    };
    const Cell cells[] = {
        {"cross_full", false, 200, 0.0},  {"cross_m20", false, 20, 0.0},        {"cross_m50", false, 50, 0.0},
        {"image_m60", true, 60, 0.0},     {"cross_m20_noisy", false, 20, 0.15}, {"cross_m50_noisy", false, 50, 0.15},
    };
    std::vector<ExperimentManifest> out;
    for (const Cell& c : cells) {
        ExperimentManifest mf;
        mf.name = c.name;
        mf.grid_size = paper ? 128 : 64;
        mf.num_sensors = n;
        mf.m = c.m * n / 200;
        mf.matrix = c.m == 200 ? sensing::MatrixKind::subsample : sensing::MatrixKind::bernoulli;
        mf.noise_level = c.noise;
        if (c.image) {
            mf.phantom = PhantomKind::image;
            mf.phantom_path = image_phantom;
        }
        mf.recon.max_iters = paper ? 5000 : 2000;
        mf.recon.record_objective_every = 10;
        mf.output_dir = root / c.name;
        out.push_back(std::move(mf));
    }
    return out;
}

std::vector<CellResult> run_paper_grid(Profile profile, const std::filesystem::path& root,
                                       const std::filesystem::path& image_phantom, const GridOptions& options) {
    std::vector<CellResult> results;
    for (ExperimentManifest mf : paper_grid(profile, root, image_phantom)) {
        mf.recon.paper_thresholding = options.paper_thresholding;
        if (options.max_iters) mf.recon.max_iters = *options.max_iters;
        CellResult cell;
        cell.name = mf.name;
        try {
            cell.report = run_experiment(mf, options.seed);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        if (options.verbose) {
            if (cell.ok) {
                std::fprintf(stderr, "%-18s joint %.4f  fbp %.4f  (%.1f s)\n", cell.name.c_str(),
                             cell.report.metrics.relative_l2_error, cell.report.metrics.fbp_relative_l2_error,
                             cell.report.wall_seconds);
            } else {
                std::fprintf(stderr, "%-18s FAILED: %s\n", cell.name.c_str(), cell.error.c_str());
            }
        }
        results.push_back(std::move(cell));
    }
    std::filesystem::create_directories(root);
    write_summary_csv(root / "summary.csv", results);
    return results;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "cell,status,joint_error,fbp_error,joint_psnr,fbp_psnr,wall_seconds,message\n";
    out.precision(17);
    for (const CellResult& c : cells) {
        out << c.name << ',' << (c.ok ? "ok" : "failed") << ',';
        if (c.ok) {
            const Metrics& m = c.report.metrics;
            out << m.relative_l2_error << ',' << m.fbp_relative_l2_error << ',' << m.psnr << ',' << m.fbp_psnr << ','
                << c.report.wall_seconds << ',';
        } else {
            std::string msg = c.error;
            for (char& ch : msg) {
                if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
            }
            out << ",,,,," << msg;
        }
        out << '\n';
    }
}

void freeze_baselines(const std::filesystem::path& path, Profile profile, const std::vector<CellResult>& cells,
                      double slack) {
    Json root = Json::object();
    if (std::filesystem::exists(path)) root = Json::parse(read_text(path));
    Json section = Json::object();
    for (const CellResult& c : cells) {
        if (!c.ok) throw Error("cannot freeze baselines: cell " + c.name + " failed: " + c.error);
        const Metrics& m = c.report.metrics;
        section[c.name] = Json{{"joint_error", m.relative_l2_error},
                               {"fbp_error", m.fbp_relative_l2_error},
                               {"joint_threshold", m.relative_l2_error * (1.0 + slack)}};
    }
    root[std::string(to_string(profile))] = section;
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    write_text(path, root.dump(2) + "\n");
}

std::optional<Baseline> load_baseline(const std::filesystem::path& path, Profile profile, std::string_view cell) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    const Json root = Json::parse(read_text(path));
    const auto sec = root.find(std::string(to_string(profile)));
    if (sec == root.end()) return std::nullopt;
    const auto it = sec->find(std::string(cell));
    if (it == sec->end()) return std::nullopt;
    return Baseline{it->at("joint_error").get<double>(), it->at("fbp_error").get<double>(),
                    it->at("joint_threshold").get<double>()};
}

} // namespace cspat::harness
