#include "cspat/harness.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace cspat::harness {

using Json = nlohmann::ordered_json;

namespace {

void check_keys(const Json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (std::string_view k : allowed) known = known || item.key() == k;
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
    }
}

template <typename T>
T get(const Json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
std::optional<T> get_optional(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return get<T>(obj, key, T{});
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

} // namespace

std::string_view to_string(PhantomKind kind) { return kind == PhantomKind::cross ? "cross" : "image"; }

std::string_view to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::joint: return "joint";
    case SolverKind::two_stage: return "two_stage";
    case SolverKind::fbp: return "fbp";
    }
    return "joint";
}

PhantomKind parse_phantom_kind(std::string_view name) {
    if (name == "cross") return PhantomKind::cross;
    if (name == "image") return PhantomKind::image;
    throw ConfigError("unknown phantom kind '" + std::string(name) + "'");
}

SolverKind parse_solver_kind(std::string_view name) {
    if (name == "joint") return SolverKind::joint;
    if (name == "two_stage") return SolverKind::two_stage;
    if (name == "fbp") return SolverKind::fbp;
    throw ConfigError("unknown solver '" + std::string(name) + "'");
}

ExperimentManifest resolve(ExperimentManifest manifest, std::uint64_t seed) {
    if (!manifest.radius) manifest.radius = 0.35 * static_cast<double>(manifest.grid_size - 1);
    if (!manifest.matrix_seed) manifest.matrix_seed = seed;
    if (!manifest.noise_seed) manifest.noise_seed = seed + 1;
    return manifest;
}

std::string to_json(const ExperimentManifest& mf) {
    Json phantom{{"kind", to_string(mf.phantom)}};
    if (mf.phantom == PhantomKind::image) phantom["path"] = mf.phantom_path.generic_string();
    const recon::ReconConfig& rc = mf.recon;
    Json j{
        {"name", mf.name},
        {"phantom", phantom},
        {"grid", {{"size", mf.grid_size}}},
        {"geometry",
         {{"radius", optional_json(mf.radius)},
          {"num_sensors", mf.num_sensors},
          {"coverage", mf.coverage},
          {"start_angle", mf.start_angle}}},
        {"time", {{"samples", mf.time_samples}}},
        {"matrix", {{"kind", sensing::to_string(mf.matrix)}, {"m", mf.m}, {"seed", optional_json(mf.matrix_seed)}}},
        {"noise", {{"level", mf.noise_level}, {"seed", optional_json(mf.noise_seed)}}},
        {"solver", to_string(mf.solver)},
        {"recon",
         {{"alpha", rc.alpha},
          {"beta", rc.beta},
          {"step_mu", rc.step_mu},
          {"max_iters", rc.max_iters},
          {"record_objective_every", rc.record_objective_every},
          {"stop_tol", rc.stop_tol},
          {"paper_thresholding", rc.paper_thresholding},
          {"backtracking", rc.backtracking}}},
        {"output_dir", mf.output_dir.generic_string()},
    };
    return j.dump(2) + "\n";
}

ExperimentManifest manifest_from_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("manifest is not valid JSON: ") + e.what());
    }
    check_keys(j, "manifest",
               {"name", "phantom", "grid", "geometry", "time", "matrix", "noise", "solver", "recon", "output_dir"});

    ExperimentManifest mf;
    mf.name = get<std::string>(j, "name", mf.name);

    const Json phantom = j.value("phantom", Json::object());
    check_keys(phantom, "phantom", {"kind", "path"});
    mf.phantom = parse_phantom_kind(get<std::string>(phantom, "kind", "cross"));
    mf.phantom_path = get<std::string>(phantom, "path", "");
    if (mf.phantom == PhantomKind::image && mf.phantom_path.empty()) {
        throw ConfigError("image phantom needs a path");
    }

    const Json grid = j.value("grid", Json::object());
    check_keys(grid, "grid", {"size"});
    mf.grid_size = get<std::size_t>(grid, "size", mf.grid_size);

    const Json geo = j.value("geometry", Json::object());
    check_keys(geo, "geometry", {"radius", "num_sensors", "coverage", "start_angle"});
    mf.radius = get_optional<double>(geo, "radius");
    mf.num_sensors = get<std::size_t>(geo, "num_sensors", mf.num_sensors);
    mf.coverage = get<double>(geo, "coverage", mf.coverage);
    mf.start_angle = get<double>(geo, "start_angle", mf.start_angle);

    const Json time = j.value("time", Json::object());
    check_keys(time, "time", {"samples"});
    mf.time_samples = get<std::size_t>(time, "samples", mf.time_samples);

    const Json mat = j.value("matrix", Json::object());
    check_keys(mat, "matrix", {"kind", "m", "seed"});
    mf.matrix = sensing::parse_matrix_kind(get<std::string>(mat, "kind", "bernoulli"));
    mf.m = get<std::size_t>(mat, "m", mf.m);
    mf.matrix_seed = get_optional<std::uint64_t>(mat, "seed");

    const Json noise = j.value("noise", Json::object());
    check_keys(noise, "noise", {"level", "seed"});
    mf.noise_level = get<double>(noise, "level", 0.0);
    mf.noise_seed = get_optional<std::uint64_t>(noise, "seed");

    mf.solver = parse_solver_kind(get<std::string>(j, "solver", "joint"));

    const Json rj = j.value("recon", Json::object());
    check_keys(rj, "recon",
               {"alpha", "beta", "step_mu", "max_iters", "record_objective_every", "stop_tol", "paper_thresholding",
                "backtracking"});
    recon::ReconConfig& rc = mf.recon;
    rc.alpha = get<double>(rj, "alpha", rc.alpha);
    rc.beta = get<double>(rj, "beta", rc.beta);
    rc.step_mu = get<double>(rj, "step_mu", rc.step_mu);
    rc.max_iters = get<std::size_t>(rj, "max_iters", rc.max_iters);
    rc.record_objective_every = get<std::size_t>(rj, "record_objective_every", rc.record_objective_every);
    rc.stop_tol = get<double>(rj, "stop_tol", rc.stop_tol);
    rc.paper_thresholding = get<bool>(rj, "paper_thresholding", rc.paper_thresholding);
    rc.backtracking = get<bool>(rj, "backtracking", rc.backtracking);
    rc.validate();

    mf.output_dir = get<std::string>(j, "output_dir", mf.output_dir.generic_string());

    if (mf.noise_level < 0.0) throw ConfigError("noise level must be nonnegative");
    if (mf.m == 0 || mf.m > mf.num_sensors) throw ConfigError("matrix rows m must lie in [1, num_sensors]");
    return mf;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    ExperimentManifest mf = manifest_from_json(text.str());
    if (mf.phantom == PhantomKind::image) {
        if (mf.phantom_path.is_relative()) mf.phantom_path = (path.parent_path() / mf.phantom_path).lexically_normal();
        if (!std::filesystem::exists(mf.phantom_path)) {
            throw InputError("phantom image not found: " + mf.phantom_path.string());
        }
    }
    return mf;
}

void save_manifest(const std::filesystem::path& path, const ExperimentManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << to_json(manifest);
}

std::string to_json(const Metrics& m) {
    const Json j{
        {"relative_l2_error", m.relative_l2_error},
        {"psnr", m.psnr},
        {"fbp_relative_l2_error", m.fbp_relative_l2_error},
        {"fbp_psnr", m.fbp_psnr},
        {"iterations", m.iterations},
        {"final_objective", m.final_objective},
        {"operator_norm", m.operator_norm},
    };
    return j.dump(2) + "\n";
}

Metrics metrics_from_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("metrics are not valid JSON: ") + e.what());
    }
    Metrics m;
    m.relative_l2_error = get<double>(j, "relative_l2_error", 0.0);
    m.psnr = get<double>(j, "psnr", 0.0);
    m.fbp_relative_l2_error = get<double>(j, "fbp_relative_l2_error", 0.0);
    m.fbp_psnr = get<double>(j, "fbp_psnr", 0.0);
    m.iterations = get<std::size_t>(j, "iterations", 0);
    m.final_objective = get<double>(j, "final_objective", 0.0);
    m.operator_norm = get<double>(j, "operator_norm", 0.0);
    return m;
}

} // namespace cspat::harness
