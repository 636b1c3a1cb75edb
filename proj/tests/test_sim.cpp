#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace phfem;

namespace {

Vec random_state(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vec x(n);
    for (auto& v : x) v = normal(rng);
    return x;
}

// sin^2 pulse of length 2 on the left (q-causal) port of a line model
InputSignal left_pulse() {
    return [](double t) {
        Vec u = Vec::Zero(2);
        u(1) = corner_pulse(t, 2.0);
        return u;
    };
}

double max_defect(const PHModel& model, double dt) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.input = left_pulse();
    return simulate(model, cfg, Vec::Zero(model.state_dim())).max_balance_defect();
}

} // namespace

TEST(Simulation, ZeroStateWithZeroInputStaysAtRest) {
    const LineModel lm = build_1d_model(10, 0.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.5;
    const Trajectory tr = simulate(lm.model, cfg, Vec::Zero(20));
    EXPECT_EQ(tr.times.size(), 51u);
    EXPECT_EQ(tr.final_state.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(tr.max_balance_defect(), 0.0);
}

TEST(Simulation, MidpointConservesEnergyWithoutInputs) {
    const LineModel lm = build_1d_model(40, 1.0 / 6.0);
    const SimplexMesh mesh = build_rect_mesh(3, 3, 1.0 / 3.0);
    const PlanarModel pm = build_planar_model(mesh, oracle::all_q_partition(mesh), TriangleWeights::preset("set4"));
    for (const PHModel* m : {&lm.model, &pm.model}) {
        SimConfig cfg;
        cfg.dt = 0.01;
        cfg.t_end = 100.0; // 10^4 steps
        const Trajectory tr = simulate(*m, cfg, random_state(m->state_dim(), 5));
        ASSERT_EQ(tr.energy.size(), 10001u);
        double drift = 0.0;
        for (double H : tr.energy) drift = std::max(drift, std::abs(H - tr.energy[0]) / tr.energy[0]);
        EXPECT_LT(drift, 1e-10);
    }
}

TEST(Simulation, MatchesExactExponentialOfTheFiniteVolumeModel) {
    const int n = 20;
    const double dt = 1e-3;
    const LineModel lm = build_1d_model(n, 0.0);
    const oracle::StaggeredModel fv = oracle::staggered_line(n);
    const oracle::ExactHold exact(fv.A, fv.B, dt);
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.input = left_pulse();
    cfg.keep_states = true;
    const Trajectory tr = simulate(lm.model, cfg, Vec::Zero(2 * n));
    Vec x = Vec::Zero(2 * n);
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
        x = exact.step(x, cfg.input((k - 0.5) * dt));
        worst = std::max(worst, (tr.states[k] - x).cwiseAbs().maxCoeff());
        scale = std::max(scale, x.cwiseAbs().maxCoeff());
    }
    EXPECT_GT(scale, 1e-3);
    EXPECT_LT(worst, 1e-6);
}

TEST(Simulation, BalanceDefectIsSecondOrder) {
    const LineModel lm = build_1d_model(20, 1.0 / 6.0);
    const double coarse = max_defect(lm.model, 0.02), fine = max_defect(lm.model, 0.01);
    EXPECT_GT(coarse, 0.0);
    EXPECT_NEAR(coarse / fine, 4.0, 0.5);
}

TEST(Simulation, SnapshotsAndOutputs) {
    const LineModel lm = build_1d_model(10, 0.0);
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1.0;
    cfg.snapshot_times = {0.0, 0.5, 1.0};
    cfg.input = left_pulse();
    const Trajectory tr = simulate(lm.model, cfg, Vec::Zero(20));
    ASSERT_EQ(tr.snapshots.size(), 3u);
    EXPECT_EQ(tr.snapshot_times, cfg.snapshot_times);
    EXPECT_EQ(tr.snapshots[0].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((tr.snapshots[2] - tr.final_state).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(tr.outputs.rows(), 11);
    EXPECT_EQ(tr.outputs.cols(), 2);
}

TEST(Simulation, RejectsInvalidConfigurations) {
    const LineModel lm = build_1d_model(10, 0.0);
    auto kind_of = [&](SimConfig cfg, const Vec& x0) {
        try {
            simulate(lm.model, cfg, x0);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InternalConsistency;
    };
    SimConfig off_grid;
    off_grid.dt = 0.3;
    off_grid.t_end = 1.0;
    EXPECT_EQ(kind_of(off_grid, Vec::Zero(20)), ErrorKind::InvalidArgument);
    SimConfig snap;
    snap.dt = 0.1;
    snap.t_end = 1.0;
    snap.snapshot_times = {0.25};
    EXPECT_EQ(kind_of(snap, Vec::Zero(20)), ErrorKind::InvalidArgument);
    SimConfig ok;
    ok.dt = 0.1;
    ok.t_end = 1.0;
    EXPECT_EQ(kind_of(ok, Vec::Zero(7)), ErrorKind::InvalidArgument);
    SimConfig blowup = ok;
    blowup.input = [](double t) {
        Vec u = Vec::Zero(2);
        if (t > 0.5) u(0) = std::numeric_limits<double>::quiet_NaN();
        return u;
    };
    EXPECT_EQ(kind_of(blowup, Vec::Zero(20)), ErrorKind::NumericalFailure);
}

TEST(Wave2D, CornerPulseShape) {
    EXPECT_EQ(corner_pulse(-1.0, 8.0), 0.0);
    EXPECT_NEAR(corner_pulse(4.0, 8.0), 1.0, 1e-15);
    EXPECT_NEAR(corner_pulse(2.0, 8.0), 0.5, 1e-15);
    EXPECT_EQ(corner_pulse(8.0, 8.0), 0.0);
}

TEST(Wave2D, SmallExperimentConservesEnergyAfterThePulse) {
    Wave2DConfig cfg;
    cfg.n = 10;
    cfg.side = 5.0;
    cfg.t_end = 4.0;
    cfg.pulse_end = 2.0;
    cfg.dt = 0.05;
    cfg.snapshot_times = {0.0, 2.0, 4.0};
    const Wave2DResult res = wave2d_experiment(cfg);
    ASSERT_EQ(res.snapshots.size(), 3u);
    for (double v : res.snapshots[0].values) EXPECT_EQ(v, 0.0);
    EXPECT_LT(res.energy_after_pulse_drift, 1e-10);
    EXPECT_LT(res.trajectory.max_balance_defect(), 1e-3 * *std::max_element(res.trajectory.energy.begin(), res.trajectory.energy.end()));
    EXPECT_GT(res.front_radius, 0.0);
    EXPECT_EQ(res.pm.model.input_dim(), 1 + 4 * 10 - 2);
}

TEST(Wave2D, AllPresetsProduceStableModels) {
    for (const char* preset : {"set1", "set2", "set3", "set4"}) {
        Wave2DConfig cfg;
        cfg.n = 6;
        cfg.side = 3.0;
        cfg.t_end = 1.0;
        cfg.pulse_end = 0.5;
        cfg.preset = preset;
        cfg.snapshot_times = {};
        const Wave2DResult res = wave2d_experiment(cfg);
        EXPECT_TRUE(res.trajectory.final_state.allFinite()) << preset;
        EXPECT_LT(res.energy_after_pulse_drift, 1e-10) << preset;
    }
}
