#include "cspat/recon.hpp"

#include "cspat/error.hpp"
#include "cspat/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cspat::recon {

namespace {

constexpr double kDivergenceFactor = 1e12;
constexpr std::size_t kStopWindow = 10;
constexpr int kMaxHalvings = 40;

double squared(double v) { return v * v; }

// Terms at (f, h) given the already computed data residuals.
ObjectiveTerms terms_from_residuals(const SourceImage& f, const SourceImage& h, const SensorData& rf,
                                    const SensorData& rh, const SourceImage& coupling, const ReconConfig& rc) {
    ObjectiveTerms t;
    t.data_f = 0.5 * squared(norm2(rf));
    t.data_h = 0.5 * squared(norm2(rh));
    t.coupling = 0.5 * rc.alpha * squared(norm2(coupling));
    t.l1 = rc.beta * norm1(h);
    t.feasible = f.min() >= 0.0;
    return t;
}

HistoryEntry entry(std::size_t iteration, const ObjectiveTerms& t, const SensorData& rf, const SensorData& rh,
                   const SourceImage& coupling) {
    return HistoryEntry{iteration, t.total(), norm2(rf), norm2(rh), norm2(coupling), t.l1};
}

struct Gradient {
    SourceImage f;
    SourceImage h;
};

Gradient gradient_from_residuals(const JointProblem& p, const SensorData& rf, const SensorData& rh,
                                 const SourceImage& coupling, const ReconConfig& rc) {
    SourceImage gf = p.op().adjoint(rf);
    gf.axpy(rc.alpha, discrete_laplacian(coupling));
    SourceImage gh = p.op().adjoint(rh);
    gh.axpy(-rc.alpha, hadamard(coupling, p.inv_c2()));
    return {std::move(gf), std::move(gh)};
}

double relative_change(const SourceImage& f_old, const SourceImage& h_old, const SourceImage& f_new,
                       const SourceImage& h_new) {
    const double diff = std::hypot(norm2(f_new - f_old), norm2(h_new - h_old));
    const double scale = std::hypot(norm2(f_new), norm2(h_new));
    return scale > 0.0 ? diff / scale : diff;
}

void check_divergence(double value, double initial, std::size_t iteration, double step) {
    if (!std::isfinite(value) || (initial > 0.0 && value > kDivergenceFactor * initial)) {
        std::ostringstream msg;
        msg << "proximal gradient diverged at iteration " << iteration << " (objective " << value
            << "); try a smaller step_mu than " << step;
        throw NumericalError(msg.str());
    }
}

} // namespace

void ReconConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (!(step_mu > 0.0)) throw ConfigError("step_mu must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (record_objective_every < 1) throw ConfigError("record_objective_every must be at least 1");
    if (stop_tol < 0.0) throw ConfigError("stop_tol must be nonnegative");
}

void write_history_csv(std::ostream& out, const std::vector<HistoryEntry>& history) {
    out << "iteration,objective,data_f_residual,data_h_residual,coupling_residual,l1_term\n";
    out << std::setprecision(17);
    for (const HistoryEntry& e : history) {
        out << e.iteration << ',' << e.objective << ',' << e.data_f_residual << ',' << e.data_h_residual << ','
            << e.coupling_residual << ',' << e.l1_term << '\n';
    }
}

std::vector<HistoryEntry> read_history_csv(std::istream& in) {
    std::vector<HistoryEntry> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        HistoryEntry e;
        char comma = 0;
        row >> e.iteration >> comma >> e.objective >> comma >> e.data_f_residual >> comma >> e.data_h_residual >>
            comma >> e.coupling_residual >> comma >> e.l1_term;
        if (!row) throw InputError("malformed history row: " + line);
        out.push_back(e);
    }
    return out;
}

JointProblem::JointProblem(const sensing::CsOperator& op, SensorData y, SensorData y2)
    : op_(&op), y_(std::move(y)), y2_(std::move(y2)), inv_c2_(op.grid()) {
    if (y_.rows() != op.matrix().m || !(y_.time_axis() == op.time_axis())) {
        throw ShapeError("joint problem: data y does not match the measurement operator");
    }
    require_same_shape(y_, y2_, "joint problem y vs y''");
    const SourceImage& c = op.propagator().config().sound_speed;
    const double floor = 1e-6 * c.max();
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double ck = std::max(c[k], floor);
        inv_c2_[k] = 1.0 / (ck * ck);
    }
}

SourceImage JointProblem::coupling_residual(const SourceImage& f, const SourceImage& h) const {
    SourceImage r = discrete_laplacian(f);
    r -= hadamard(h, inv_c2_);
    return r;
}

ObjectiveTerms objective_terms(const SourceImage& f, const SourceImage& h, const JointProblem& problem,
                               const ReconConfig& rc) {
    require_same_grid(f, h, "objective");
    const SensorData rf = problem.op().forward(f) - problem.y();
    const SensorData rh = problem.op().forward(h) - problem.y2();
    return terms_from_residuals(f, h, rf, rh, problem.coupling_residual(f, h), rc);
}

double objective(const SourceImage& f, const SourceImage& h, const JointProblem& problem, const ReconConfig& rc) {
    return objective_terms(f, h, problem, rc).total();
}

std::pair<SourceImage, SourceImage> grad_smooth(const SourceImage& f, const SourceImage& h,
                                                const JointProblem& problem, const ReconConfig& rc) {
    require_same_grid(f, h, "grad_smooth");
    const SensorData rf = problem.op().forward(f) - problem.y();
    const SensorData rh = problem.op().forward(h) - problem.y2();
    Gradient g = gradient_from_residuals(problem, rf, rh, problem.coupling_residual(f, h), rc);
    return {std::move(g.f), std::move(g.h)};
}

SourceImage prox_nonneg(SourceImage f) {
    for (double& v : f.values()) v = std::max(v, 0.0);
    return f;
}

SourceImage prox_l1(SourceImage h, double threshold) {
    if (threshold < 0.0) throw ConfigError("soft threshold must be nonnegative");
    for (double& v : h.values()) {
        const double shrunk = std::max(std::abs(v) - threshold, 0.0);
        v = v < 0.0 ? -shrunk : (v > 0.0 ? shrunk : 0.0);
    }
    return h;
}

JointState solve_joint(const JointProblem& problem, const ReconConfig& rc, const ProgressCallback& progress) {
    rc.validate();
    const Grid2D& grid = problem.op().grid();
    JointState state{SourceImage(grid), SourceImage(grid), 0, {}};
    SensorData rf = -1.0 * problem.y();
    SensorData rh = -1.0 * problem.y2();
    SourceImage coupling(grid);

    ObjectiveTerms terms = terms_from_residuals(state.f, state.h, rf, rh, coupling, rc);
    const double initial = terms.total();
    auto record = [&] {
        state.history.push_back(entry(state.iteration, terms, rf, rh, coupling));
        if (progress) progress(state.history.back());
    };
    record();

    double step = rc.step_mu;
    std::size_t quiet = 0;
    while (state.iteration < rc.max_iters) {
        const Gradient g = gradient_from_residuals(problem, rf, rh, coupling, rc);

        SourceImage f_new = prox_nonneg(state.f - step * g.f);
        SourceImage h_new = prox_l1(state.h - step * g.h, rc.l1_threshold(step));
        SensorData rf_new = problem.op().forward(f_new) - problem.y();
        SensorData rh_new = problem.op().forward(h_new) - problem.y2();
        SourceImage coupling_new = problem.coupling_residual(f_new, h_new);
        ObjectiveTerms terms_new = terms_from_residuals(f_new, h_new, rf_new, rh_new, coupling_new, rc);

        for (int halving = 0; rc.backtracking && halving < kMaxHalvings; ++halving) {
            const SourceImage df = f_new - state.f;
            const SourceImage dh = h_new - state.h;
            const double bound = terms.smooth() + dot(g.f, df) + dot(g.h, dh) +
                                 (squared(norm2(df)) + squared(norm2(dh))) / (2.0 * step);
            if (terms_new.smooth() <= bound * (1.0 + 1e-12)) break;
            step *= 0.5;
            f_new = prox_nonneg(state.f - step * g.f);
            h_new = prox_l1(state.h - step * g.h, rc.l1_threshold(step));
            rf_new = problem.op().forward(f_new) - problem.y();
            rh_new = problem.op().forward(h_new) - problem.y2();
            coupling_new = problem.coupling_residual(f_new, h_new);
            terms_new = terms_from_residuals(f_new, h_new, rf_new, rh_new, coupling_new, rc);
        }

        const double change = relative_change(state.f, state.h, f_new, h_new);
        state.f = std::move(f_new);
        state.h = std::move(h_new);
        rf = std::move(rf_new);
        rh = std::move(rh_new);
        coupling = std::move(coupling_new);
        terms = terms_new;
        ++state.iteration;

        check_divergence(terms.total(), initial, state.iteration, step);
        quiet = (rc.stop_tol > 0.0 && change < rc.stop_tol) ? quiet + 1 : 0;
        const bool stop = quiet >= kStopWindow || state.iteration == rc.max_iters;
        if (state.iteration % rc.record_objective_every == 0 || stop) record();
        if (stop) break;
    }
    return state;
}

TwoStageResult solve_l1_then_poisson(const sensing::CsOperator& op, const SensorData& y2, const ReconConfig& rc,
                                     const ProgressCallback& progress) {
    rc.validate();
    // Reuse JointProblem for the 1/c^2 map; y only has to have the right shape.
    const JointProblem problem(op, y2, y2);
    const Grid2D& grid = op.grid();
    TwoStageResult result{SourceImage(grid), SourceImage(grid), {}};
    SensorData rh = -1.0 * y2;
    const SourceImage zero_image(grid);

    auto record = [&](std::size_t iteration) {
        const double data = 0.5 * squared(norm2(rh));
        const double l1 = rc.beta * norm1(result.h);
        result.history.push_back(HistoryEntry{iteration, data + l1, 0.0, norm2(rh), 0.0, l1});
        if (progress) progress(result.history.back());
    };
    record(0);
    const double initial = 0.5 * squared(norm2(rh));

    std::size_t quiet = 0;
    for (std::size_t it = 1; it <= rc.max_iters; ++it) {
        SourceImage h_new = prox_l1(result.h - rc.step_mu * op.adjoint(rh), rc.l1_threshold(rc.step_mu));
        const double change = relative_change(zero_image, result.h, zero_image, h_new);
        result.h = std::move(h_new);
        rh = op.forward(result.h) - y2;
        const double value = 0.5 * squared(norm2(rh)) + rc.beta * norm1(result.h);
        check_divergence(value, initial, it, rc.step_mu);
        quiet = (rc.stop_tol > 0.0 && change < rc.stop_tol) ? quiet + 1 : 0;
        const bool stop = quiet >= kStopWindow || it == rc.max_iters;
        if (it % rc.record_objective_every == 0 || stop) record(it);
        if (stop) break;
    }
    result.f = poisson_solve(hadamard(result.h, problem.inv_c2()));
    return result;
}

} // namespace cspat::recon
