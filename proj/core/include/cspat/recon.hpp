#pragma once

#include "cspat/image.hpp"
#include "cspat/sensing.hpp"
#include "cspat/sensor_data.hpp"
#include "cspat/wave.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace cspat::recon {

struct ReconConfig {
    double alpha = 0.1;
    double beta = 0.005;
    double step_mu = 0.1;
    std::size_t max_iters = 5000;
    std::size_t record_objective_every = 10;
    // Relative iterate change below which the run stops once it has held for
    // ten consecutive iterations. 0 runs the full budget.
    double stop_tol = 0.0;
    // Soft-threshold h by beta instead of step_mu * beta.
    bool paper_thresholding = false;
    // Halve the step until the quadratic upper bound holds.
    bool backtracking = false;

    void validate() const;
    double l1_threshold(double step) const { return paper_thresholding ? beta : step * beta; }

    friend bool operator==(const ReconConfig&, const ReconConfig&) = default;
};

// Terms of 1/2||Mf-y||^2 + 1/2||Mh-y''||^2 + alpha/2||Lf - h/c^2||^2
//          + beta||h||_1 + I_C(f).
struct ObjectiveTerms {
    double data_f = 0.0;
    double data_h = 0.0;
    double coupling = 0.0;
    double l1 = 0.0;
    bool feasible = true;

    double smooth() const { return data_f + data_h + coupling; }
    // +infinity when f leaves the nonnegative cone.
    double total() const {
        return feasible ? smooth() + l1 : std::numeric_limits<double>::infinity();
    }
};

struct HistoryEntry {
    std::size_t iteration = 0;
    double objective = 0.0;
    double data_f_residual = 0.0;   // ||Mf - y||
    double data_h_residual = 0.0;   // ||Mh - y''||
    double coupling_residual = 0.0; // ||Lf - h/c^2||
    double l1_term = 0.0;           // beta ||h||_1
};

void write_history_csv(std::ostream& out, const std::vector<HistoryEntry>& history);
std::vector<HistoryEntry> read_history_csv(std::istream& in);

struct JointState {
    SourceImage f;
    SourceImage h;
    std::size_t iteration = 0;
    std::vector<HistoryEntry> history;
};

// Everything the joint functional needs besides the unknowns.
class JointProblem {
public:
    JointProblem(const sensing::CsOperator& op, SensorData y, SensorData y2);

    const sensing::CsOperator& op() const { return *op_; }
    const SensorData& y() const { return y_; }
    const SensorData& y2() const { return y2_; }
    // 1 / c^2 with c clamped below at 1e-6 max(c).
    const SourceImage& inv_c2() const { return inv_c2_; }

    // Lf - h/c^2
    SourceImage coupling_residual(const SourceImage& f, const SourceImage& h) const;

private:
    const sensing::CsOperator* op_;
    SensorData y_;
    SensorData y2_;
    SourceImage inv_c2_;
};

ObjectiveTerms objective_terms(const SourceImage& f, const SourceImage& h, const JointProblem& problem,
                               const ReconConfig& rc);
double objective(const SourceImage& f, const SourceImage& h, const JointProblem& problem,
                 const ReconConfig& rc);

// (grad_f Phi, grad_h Phi) of the smooth part.
std::pair<SourceImage, SourceImage> grad_smooth(const SourceImage& f, const SourceImage& h,
                                                const JointProblem& problem, const ReconConfig& rc);

SourceImage prox_nonneg(SourceImage f);
SourceImage prox_l1(SourceImage h, double threshold);

using ProgressCallback = std::function<void(const HistoryEntry&)>;

// Proximal gradient iteration from f = h = 0.
JointState solve_joint(const JointProblem& problem, const ReconConfig& rc,
                       const ProgressCallback& progress = {});

struct TwoStageResult {
    SourceImage f;
    SourceImage h;
    std::vector<HistoryEntry> history;
};

// ISTA on 1/2||Mh - y''||^2 + beta||h||_1, then Lf = h/c^2.
TwoStageResult solve_l1_then_poisson(const sensing::CsOperator& op, const SensorData& y2,
                                     const ReconConfig& rc, const ProgressCallback& progress = {});

// Backprojection for detectors on a circle: time-derivative filter, Abel
// kernel 1/sqrt(c^2 t^2 - d^2) and arc-weighted sum over sensors, for constant
// speed (mean of the configured sound speed). data.rows() must equal the
// sensor count.
SourceImage fbp_reconstruct(const SensorData& data, const DetectorGeometry& geometry,
                            const wave::WaveConfig& cfg);

} // namespace cspat::recon
