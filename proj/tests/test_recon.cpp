#include "cspat/error.hpp"
#include "cspat/poisson.hpp"
#include "cspat/recon.hpp"
#include "cspat/rng.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace cspat;
using cspat::fixtures::Instance;
using cspat::fixtures::make_instance;

namespace {

// Frozen from the reference runs.
constexpr double kTwoStageDice = 0.56;     // measured 0.591
constexpr double kFbpFullDataError = 0.40; // measured 0.381

SourceImage random_image(const Grid2D& g, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    SourceImage f(g);
    for (double& v : f.values()) v = scale * rng.gaussian();
    return f;
}

harness::ExperimentManifest small_manifest() {
    harness::ExperimentManifest mf;
    mf.grid_size = 32;
    mf.num_sensors = 16;
    mf.m = 6;
    mf.time_samples = 101;
    return mf;
}

const Instance& small_instance() {
    static const Instance inst = make_instance(small_manifest());
    return inst;
}

const Instance& reference_instance() {
    static const Instance inst = make_instance(fixtures::reference_manifest());
    return inst;
}

} // namespace

TEST(Objective, ZeroEverything) {
    const Instance& in = small_instance();
    const SensorData zero(in.y.rows(), in.y.time_axis());
    const recon::JointProblem p(*in.op, zero, zero);
    const SourceImage z(in.setup.grid);
    EXPECT_EQ(recon::objective(z, z, p, {}), 0.0);
}

TEST(Objective, ZeroUnknownsGiveHalfDataNorms) {
    const Instance& in = small_instance();
    const SourceImage z(in.setup.grid);
    const double expected = 0.5 * dot(in.y, in.y) + 0.5 * dot(in.y2, in.y2);
    EXPECT_NEAR(recon::objective(z, z, in.problem(), {}), expected, 1e-14 * expected);
}

TEST(Objective, MatchesIndependentEvaluator) {
    const Instance& in = small_instance();
    const recon::JointProblem p = in.problem();
    recon::ReconConfig rc;
    rc.alpha = 0.3;
    rc.beta = 0.02;
    SourceImage f = random_image(in.setup.grid, 1);
    for (double& v : f.values()) v = std::abs(v);
    const SourceImage h = random_image(in.setup.grid, 2);

    // Written out term by term with plain loops.
    const wave::Propagator prop(in.setup.wave, in.setup.geometry);
    const auto& a = in.op->matrix();
    auto data_term = [&](const SourceImage& x, const SensorData& target) {
        const SensorData w = prop.forward(x);
        double s = 0.0;
        for (std::size_t j = 0; j < a.m; ++j) {
            for (std::size_t k = 0; k < w.num_samples(); ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < a.n; ++i) acc += a(j, i) * w(i, k);
                s += (acc - target(j, k)) * (acc - target(j, k));
            }
        }
        return 0.5 * s;
    };
    const Grid2D& g = in.setup.grid;
    double coupling = 0.0, l1 = 0.0;
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
            auto at = [&](long x, long y) {
                if (x < 0 || y < 0 || x >= static_cast<long>(g.nx()) || y >= static_cast<long>(g.ny())) return 0.0;
                return f(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
            };
            const long x = static_cast<long>(ix), y = static_cast<long>(iy);
            const double lap = at(x + 1, y) + at(x - 1, y) + at(x, y + 1) + at(x, y - 1) - 4.0 * at(x, y);
            coupling += (lap - h(ix, iy)) * (lap - h(ix, iy)); // c = 1
            l1 += std::abs(h(ix, iy));
        }
    }
    const double expected = data_term(f, in.y) + data_term(h, in.y2) + 0.5 * rc.alpha * coupling + rc.beta * l1;
    EXPECT_NEAR(recon::objective(f, h, p, rc), expected, 1e-12 * expected);
}

TEST(Objective, NegativeSourceIsInfeasible) {
    const Instance& in = small_instance();
    SourceImage f(in.setup.grid);
    f(3, 3) = -1e-9;
    EXPECT_EQ(recon::objective(f, SourceImage(in.setup.grid), in.problem(), {}),
              std::numeric_limits<double>::infinity());
}

TEST(Gradient, ZeroAtZero) {
    const Instance& in = small_instance();
    const SensorData zero(in.y.rows(), in.y.time_axis());
    const recon::JointProblem p(*in.op, zero, zero);
    const SourceImage z(in.setup.grid);
    const auto [gf, gh] = recon::grad_smooth(z, z, p, {});
    EXPECT_EQ(norm2(gf), 0.0);
    EXPECT_EQ(norm2(gh), 0.0);
}

TEST(Gradient, MatchesCentralDifferences) {
    const Instance& in = small_instance();
    const recon::JointProblem p = in.problem();
    recon::ReconConfig rc;
    rc.alpha = 0.5;
    const SourceImage f = random_image(in.setup.grid, 11), h = random_image(in.setup.grid, 12);
    const auto [gf, gh] = recon::grad_smooth(f, h, p, rc);
    auto smooth = [&](const SourceImage& a, const SourceImage& b) {
        // smooth part only; the negative pixels of a are irrelevant here
        return recon::objective_terms(a, b, p, rc).smooth();
    };
    for (int block = 0; block < 2; ++block) {
        for (std::uint64_t dir_seed = 20; dir_seed < 23; ++dir_seed) {
            const SourceImage d = random_image(in.setup.grid, dir_seed);
            const double analytic = dot(block == 0 ? gf : gh, d);
            double best = std::numeric_limits<double>::infinity();
            for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
                const SourceImage zero(in.setup.grid);
                const SourceImage df = block == 0 ? eps * d : zero;
                const SourceImage dh = block == 1 ? eps * d : zero;
                const double fd = (smooth(f + df, h + dh) - smooth(f - df, h - dh)) / (2.0 * eps);
                best = std::min(best, std::abs(fd - analytic) / std::abs(analytic));
            }
            EXPECT_LE(best, 1e-5) << (block == 0 ? "f" : "h") << " block, direction " << dir_seed;
        }
    }
}

TEST(Gradient, WithoutCouplingHBlockIsDataTermOnly) {
    const Instance& in = small_instance();
    recon::ReconConfig rc;
    rc.alpha = 0.0;
    const SourceImage f = random_image(in.setup.grid, 1), h = random_image(in.setup.grid, 2);
    const auto gh = recon::grad_smooth(f, h, in.problem(), rc).second;
    const SourceImage expected = in.op->adjoint(in.op->forward(h) - in.y2);
    EXPECT_LE(norm2(gh - expected), 1e-14 * norm2(expected));
}

TEST(Prox, Nonneg) {
    const Grid2D g = Grid2D::centered(3, 3, 1.0);
    SourceImage f(g);
    f[0] = -1.0;
    f[1] = 2.0;
    const SourceImage p = recon::prox_nonneg(f);
    EXPECT_EQ(p[0], 0.0);
    EXPECT_EQ(p[1], 2.0);
    EXPECT_EQ(recon::prox_nonneg(p), p);
    EXPECT_EQ(norm2(recon::prox_nonneg(SourceImage(g, -3.0))), 0.0);
}

TEST(Prox, SoftThreshold) {
    const Grid2D g = Grid2D::centered(3, 3, 1.0);
    SourceImage h(g);
    h[0] = 2.0;
    h[1] = -0.3;
    h[2] = -2.0;
    const SourceImage p = recon::prox_l1(h, 0.5);
    EXPECT_EQ(p[0], 1.5);
    EXPECT_EQ(p[1], 0.0);
    EXPECT_EQ(p[2], -1.5);
    const SourceImage r = random_image(g, 3);
    EXPECT_EQ(recon::prox_l1(r, 0.0), r);
    EXPECT_THROW(recon::prox_l1(r, -1.0), ConfigError);
}

TEST(Prox, ClosedFormsOnRandomInput) {
    const Grid2D g = Grid2D::centered(16, 16, 1.0);
    const SourceImage x = random_image(g, 4);
    const SourceImage pn = recon::prox_nonneg(x), pl = recon::prox_l1(x, 0.7);
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_EQ(pn[k], std::max(x[k], 0.0));
        EXPECT_EQ(pl[k], std::max(std::abs(x[k]) - 0.7, 0.0) * (x[k] > 0 ? 1.0 : x[k] < 0 ? -1.0 : 0.0));
    }
}

TEST(Prox, Nonexpansive) {
    const Grid2D g = Grid2D::centered(16, 16, 1.0);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const SourceImage a = random_image(g, 2 * s), b = random_image(g, 2 * s + 1);
        EXPECT_LE(norm2(recon::prox_nonneg(a) - recon::prox_nonneg(b)), norm2(a - b));
        EXPECT_LE(norm2(recon::prox_l1(a, 0.3) - recon::prox_l1(b, 0.3)), norm2(a - b));
    }
}

TEST(ReconConfig, Validation) {
    recon::ReconConfig rc;
    EXPECT_NO_THROW(rc.validate());
    EXPECT_DOUBLE_EQ(rc.l1_threshold(0.1), 0.0005);
    rc.paper_thresholding = true;
    EXPECT_DOUBLE_EQ(rc.l1_threshold(0.1), 0.005);
    for (auto bad : {&recon::ReconConfig::alpha, &recon::ReconConfig::beta, &recon::ReconConfig::step_mu}) {
        recon::ReconConfig r;
        r.*bad = 0.0;
        EXPECT_THROW(r.validate(), ConfigError);
    }
    recon::ReconConfig r;
    r.max_iters = 0;
    EXPECT_THROW(r.validate(), ConfigError);
    r = {};
    r.stop_tol = -1.0;
    EXPECT_THROW(r.validate(), ConfigError);
}

TEST(History, CsvRoundTrip) {
    const std::vector<recon::HistoryEntry> h{{0, 1.5, 1.0, 2.0, 0.0, 0.0}, {10, 0.1 + 0.2, 1e-300, 3.0, 4.0, 5.0}};
    std::stringstream s;
    recon::write_history_csv(s, h);
    EXPECT_EQ(s.str().substr(0, s.str().find('\n')),
              "iteration,objective,data_f_residual,data_h_residual,coupling_residual,l1_term");
    const auto back = recon::read_history_csv(s);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].objective, 0.1 + 0.2);
    EXPECT_EQ(back[1].data_f_residual, 1e-300);
}

TEST(SolveJoint, ZeroDataStaysAtZero) {
    const Instance& in = small_instance();
    const SensorData zero(in.y.rows(), in.y.time_axis());
    recon::ReconConfig rc;
    rc.max_iters = 25;
    const recon::JointState st = recon::solve_joint(recon::JointProblem(*in.op, zero, zero), rc);
    EXPECT_EQ(norm2(st.f), 0.0);
    EXPECT_EQ(norm2(st.h), 0.0);
    EXPECT_EQ(st.iteration, 25u);
    // One more iteration from the fixed point changes nothing.
    rc.max_iters = 1;
    const recon::JointState one = recon::solve_joint(recon::JointProblem(*in.op, zero, zero), rc);
    EXPECT_EQ(norm2(one.f) + norm2(one.h), 0.0);
}

TEST(SolveJoint, SourceStaysNonnegativeAndHistoryIsRecorded) {
    const Instance& in = small_instance();
    recon::ReconConfig rc;
    rc.max_iters = 60;
    rc.record_objective_every = 20;
    std::size_t calls = 0;
    const recon::JointState st = recon::solve_joint(in.problem(), rc, [&](const recon::HistoryEntry&) { ++calls; });
    EXPECT_GE(st.f.min(), 0.0);
    ASSERT_EQ(st.history.size(), 4u); // 0, 20, 40, 60
    EXPECT_EQ(calls, 4u);
    EXPECT_EQ(st.history.front().iteration, 0u);
    EXPECT_EQ(st.history.back().iteration, 60u);
    for (const auto& e : st.history) EXPECT_TRUE(std::isfinite(e.objective));
    EXPECT_LT(st.history.back().objective, st.history.front().objective);
}

TEST(SolveJoint, DivergenceIsReported) {
    const Instance& in = small_instance();
    recon::ReconConfig rc;
    rc.step_mu = 50.0;
    rc.max_iters = 500;
    try {
        recon::solve_joint(in.problem(), rc);
        FAIL() << "expected divergence";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("smaller step_mu"), std::string::npos);
    }
}

TEST(SolveJoint, BacktrackingRescuesLargeStep) {
    const Instance& in = small_instance();
    recon::ReconConfig rc;
    rc.step_mu = 50.0;
    rc.max_iters = 40;
    rc.backtracking = true;
    const recon::JointState st = recon::solve_joint(in.problem(), rc);
    EXPECT_LT(st.history.back().objective, st.history.front().objective);
}

TEST(SolveJoint, EarlyStopping) {
    const Instance& in = small_instance();
    recon::ReconConfig rc;
    rc.max_iters = 5000;
    rc.stop_tol = 1e-3;
    const recon::JointState st = recon::solve_joint(in.problem(), rc);
    EXPECT_LT(st.iteration, 5000u);
    EXPECT_EQ(st.history.back().iteration, st.iteration);
}

TEST(SolveJoint, DescentForSmallStep) {
    const Instance& in = reference_instance();
    recon::ReconConfig rc;
    rc.step_mu = 0.01;
    rc.max_iters = 300;
    rc.record_objective_every = 1;
    const recon::JointState st = recon::solve_joint(in.problem(), rc);
    for (std::size_t k = 11; k < st.history.size(); ++k) {
        EXPECT_LE(st.history[k].objective, st.history[k - 1].objective * (1.0 + 1e-12)) << "iteration " << k;
    }
}

TEST(SolveJoint, CouplingTightensWithAlpha) {
    harness::ExperimentManifest mf = fixtures::reference_manifest();
    const harness::Setup setup = harness::make_setup(harness::resolve(mf, 0));
    const SourceImage spikes = fixtures::two_spikes(setup.grid);
    const Instance in = make_instance(mf, &spikes);
    double previous = std::numeric_limits<double>::infinity();
    for (double alpha : {0.01, 0.1, 1.0}) {
        recon::ReconConfig rc;
        rc.alpha = alpha;
        rc.step_mu = 0.9 / (1.0 + 64.0 * alpha); // ||M|| <= 1, ||L|| <= 8
        rc.max_iters = 1500;
        rc.record_objective_every = 1500;
        const recon::JointState st = recon::solve_joint(in.problem(), rc);
        const double coupling = norm2(in.problem().coupling_residual(st.f, st.h));
        EXPECT_LT(coupling, previous) << "alpha " << alpha;
        previous = coupling;
    }
}

TEST(TwoStage, ZeroDataGivesZero) {
    const Instance& in = small_instance();
    recon::ReconConfig rc;
    rc.max_iters = 10;
    const auto r = recon::solve_l1_then_poisson(*in.op, SensorData(in.y.rows(), in.y.time_axis()), rc);
    EXPECT_EQ(norm2(r.f), 0.0);
}

TEST(TwoStage, RecoversCrossEdges) {
    const Instance& in = reference_instance();
    recon::ReconConfig rc;
    rc.max_iters = 2000;
    const auto r = recon::solve_l1_then_poisson(*in.op, in.y2, rc);
    // Dice overlap of the strongest 5% of |L f| in both images.
    const SourceImage lt = discrete_laplacian(in.truth), lr = discrete_laplacian(r.f);
    auto top = [](const SourceImage& img) {
        std::vector<double> mags;
        for (double v : img.values()) mags.push_back(std::abs(v));
        std::vector<double> sorted = mags;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(0.95 * sorted.size()), sorted.end());
        const double cut = sorted[static_cast<std::size_t>(0.95 * sorted.size())];
        std::vector<bool> mask;
        for (double m : mags) mask.push_back(m >= cut && m > 0.0);
        return mask;
    };
    const auto a = top(lt), b = top(lr);
    double both = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        both += a[k] && b[k];
        na += a[k];
        nb += b[k];
    }
    const double dice = 2.0 * both / (na + nb);
    std::printf("two-stage edge dice %.4f\n", dice);
    EXPECT_GE(dice, kTwoStageDice);
}

TEST(Fbp, ZeroDataZeroImage) {
    const Instance& in = small_instance();
    const SourceImage img =
        recon::fbp_reconstruct(SensorData(16, in.y.time_axis()), in.setup.geometry, in.setup.wave);
    EXPECT_EQ(norm2(img), 0.0);
    EXPECT_THROW(recon::fbp_reconstruct(in.y, in.setup.geometry, in.setup.wave), ShapeError);
}

TEST(Fbp, FullDataCross) {
    harness::ExperimentManifest mf;
    mf.grid_size = 128;
    mf.num_sensors = 200;
    mf.m = 200;
    mf.matrix = sensing::MatrixKind::subsample;
    const Instance in = make_instance(mf);
    const SourceImage rec = recon::fbp_reconstruct(in.y, in.setup.geometry, in.setup.wave);
    const double err = relative_l2_error(rec, in.truth);
    std::printf("full-data fbp error %.4f\n", err);
    EXPECT_LE(err, kFbpFullDataError);
}

TEST(Fbp, GaussianPeakStaysPut) {
    harness::ExperimentManifest mf;
    mf.m = 100;
    mf.matrix = sensing::MatrixKind::subsample;
    const harness::Setup setup = harness::make_setup(harness::resolve(mf, 0));
    const SourceImage bump = make_gaussian_phantom(setup.grid, setup.geometry, {0.0, 0.0}, 3.0);
    const Instance in = make_instance(mf, &bump);
    const SourceImage rec = recon::fbp_reconstruct(in.y, in.setup.geometry, in.setup.wave);
    std::size_t best = 0;
    for (std::size_t k = 0; k < rec.size(); ++k) best = rec[k] > rec[best] ? k : best;
    const double dx = static_cast<double>(best % 64) - 31.5, dy = static_cast<double>(best / 64) - 31.5;
    EXPECT_LE(std::hypot(dx, dy), 2.0);
}
