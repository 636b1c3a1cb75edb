#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace phfem;

namespace {

PlanarModel mixed_model(const TriangleWeights& w) {
    const SimplexMesh mesh = build_rect_mesh(2, 1, 0.5);
    return build_planar_model(mesh, oracle::mixed_partition(mesh), w);
}

void expect_port_hamiltonian(const PHModel& m, double tol = 1e-12) {
    const ModelResiduals r = model_residuals(m);
    EXPECT_LT(r.J_skew, tol);
    EXPECT_LT(r.C_BT, tol);
    EXPECT_LT(r.D_skew, tol);
    EXPECT_GT(m.Q.minCoeff(), 0.0);
}

} // namespace

TEST(StateSpace, CentralLineModelEqualsStaggeredFiniteVolumes) {
    for (int n : {5, 20, 33}) {
        const LineModel lm = build_1d_model(n, 0.0);
        const oracle::StaggeredModel fv = oracle::staggered_line(n);
        EXPECT_LT(max_abs(Mat(Mat(lm.model.system_matrix()) - fv.A)), 1e-10) << n;
        EXPECT_LT(max_abs(Mat(Mat(lm.model.B) - fv.B)), 1e-14) << n;
        EXPECT_LT(max_abs(Mat(Mat(lm.model.C) * lm.model.Q.asDiagonal() - fv.CQ)), 1e-10) << n;
        EXPECT_EQ(max_abs(lm.model.D), 0.0);
    }
}

TEST(StateSpace, LineModelDimensionsAndLabels) {
    const LineModel lm = build_1d_model(20, 1.0 / 6.0);
    EXPECT_EQ(lm.model.state_dim(), 40);
    EXPECT_EQ(lm.model.input_dim(), 2);
    EXPECT_EQ(lm.model.output_dim(), 2);
    EXPECT_EQ(lm.model.p_states, 20);
    EXPECT_EQ(lm.model.labels.inputs, (std::vector<std::string>{"ep_hat_node_20", "eq_node_0"}));
    EXPECT_EQ(lm.model.labels.states.front(), "p_node_0");
    EXPECT_EQ(lm.model.labels.states.back(), "q_node_20");
}

TEST(StateSpace, LineModelsArePortHamiltonianWithoutFeedthrough) {
    for (double alpha : {-1.0 / 12.0, 0.0, 1.0 / 6.0, 0.5})
        for (int n : {2, 10, 40}) {
            const LineModel lm = build_1d_model(n, alpha);
            expect_port_hamiltonian(lm.model);
            EXPECT_EQ(max_abs(lm.model.D), 0.0);
        }
}

TEST(StateSpace, PlanarModelsArePortHamiltonian) {
    std::mt19937_64 rng(21);
    for (const char* preset : {"set1", "set2", "set3", "set4"})
        for (int n : {1, 2, 4}) {
            const SimplexMesh mesh = build_rect_mesh(n, n + 1, 1.0 / n);
            const PlanarModel pm = build_planar_model(mesh, oracle::all_q_partition(mesh), TriangleWeights::preset(preset));
            expect_port_hamiltonian(pm.model);
            EXPECT_EQ(max_abs(pm.model.D), 0.0); // no p-inputs, so no feedthrough pairs
            EXPECT_EQ(pm.model.input_dim(), 2 * (2 * n + 1));
        }
    const PlanarModel mixed = mixed_model(oracle::random_weights(rng));
    expect_port_hamiltonian(mixed.model);
    EXPECT_EQ(mixed.model.state_dim(), 8);
    EXPECT_EQ(mixed.model.input_dim(), 7);
    EXPECT_GT(max_abs(mixed.model.D), 0.1);
}

TEST(StateSpace, FeedthroughOnlyCouplesPAndQPorts) {
    const PlanarModel pm = mixed_model(TriangleWeights::preset("set2"));
    const Mat D(pm.model.D);
    const int in_p = 2;
    EXPECT_EQ(max_abs(Mat(D.topLeftCorner(in_p, in_p))), 0.0);
    EXPECT_EQ(max_abs(Mat(D.bottomRightCorner(5, 5))), 0.0);
}

TEST(StateSpace, ImageRepresentationIsADiracStructure) {
    std::mt19937_64 rng(22);
    const SimplexMesh mesh = build_rect_mesh(3, 2, 0.4);
    const MapSet maps = build_maps(mesh, oracle::all_q_partition(mesh), oracle::random_weights(rng), incidence(mesh),
                                   FormDegreeSpec::planar());
    const ImageRep rep = image_rep(maps, incidence(mesh));
    EXPECT_LT(isotropy_residual(rep), 1e-12);
    const Eigen::Index bond = mesh.node_count() + mesh.edge_count();
    EXPECT_EQ(rep.E.rows(), bond);
    EXPECT_EQ(rep.F.rows(), bond);
    EXPECT_EQ(effort_image_rank(maps), bond);
    Mat ef(bond, rep.E.cols() + rep.F.cols());
    ef << Mat(rep.E), Mat(rep.F);
    EXPECT_EQ(numerical_rank(ef), bond);

    const PlanarModel pm = mixed_model(oracle::random_weights(rng));
    EXPECT_LT(isotropy_residual(image_rep(pm.maps, pm.inc)), 1e-12);
    const LineModel lm = build_1d_model(20, 1.0 / 6.0);
    const ImageRep lrep = image_rep(lm.maps, lm.inc);
    EXPECT_LT(isotropy_residual(lrep), 1e-12);
    EXPECT_EQ(effort_image_rank(lm.maps), 42);
}

TEST(StateSpace, PowerBalanceForRandomEfforts) {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal;
    const PlanarModel pm = mixed_model(oracle::random_weights(rng));
    const LineModel lm = build_1d_model(40, 1.0 / 6.0);
    const SimplexMesh big = build_rect_mesh(5, 4, 0.2);
    const PlanarModel pb = build_planar_model(big, oracle::all_q_partition(big), TriangleWeights::preset("set4"));
    auto random_vec = [&](Eigen::Index n) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
        return v;
    };
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        worst = std::max(worst, power_balance_residual(pm.maps, pm.inc, random_vec(6), random_vec(9)));
        worst = std::max(worst, power_balance_residual(lm.maps, lm.inc, random_vec(41), random_vec(41)));
        worst = std::max(worst, power_balance_residual(pb.maps, pb.inc, random_vec(30), random_vec(69)));
    }
    EXPECT_LT(worst, 1e-12);
    EXPECT_EQ(power_balance_residual(pm.maps, pm.inc, Vec::Zero(6), Vec::Zero(9)), 0.0);
}

TEST(StateSpace, ModelPowerBalanceHoldsForStatesAndInputs) {
    // dH/dt = (Qx)^T (J Qx + B u) must equal y^T u with y = C Qx + D u
    std::mt19937_64 rng(24);
    std::normal_distribution<double> normal;
    const PlanarModel pm = mixed_model(TriangleWeights::preset("set3"));
    const PHModel& m = pm.model;
    for (int trial = 0; trial < 100; ++trial) {
        Vec x(m.state_dim()), u(m.input_dim());
        for (auto& v : x) v = normal(rng);
        for (auto& v : u) v = normal(rng);
        const Vec e = m.Q.cwiseProduct(x);
        const double dH = e.dot(m.J * e + m.B * u);
        EXPECT_NEAR(dH, m.output(x, u).dot(u), 1e-11);
    }
    EXPECT_EQ(m.hamiltonian(Vec::Zero(m.state_dim())), 0.0);
}

TEST(StateSpace, SpectrumOfLosslessModelIsImaginary) {
    const SimplexMesh mesh = build_rect_mesh(4, 4, 0.25);
    const PlanarModel pm = build_planar_model(mesh, oracle::all_q_partition(mesh), TriangleWeights::preset("set4"));
    Eigen::EigenSolver<Mat> es(Mat(pm.model.system_matrix()), false);
    EXPECT_LT(es.eigenvalues().real().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(StateSpace, BrokenMapsAreRejected) {
    LineModel lm = build_1d_model(10, 0.0);
    MapSet broken = lm.maps;
    broken.P_fq.coeffRef(3, 3) += 0.01;
    try {
        image_rep(broken, lm.inc);
        FAIL() << "expected an exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StructureViolation);
    }
    MapSet singular = lm.maps;
    std::vector<int> picks;
    for (int k = 0; k < 10; ++k) picks.push_back(k == 1 ? 0 : k);
    singular.sel.P_ep = selector(picks, 11);
    try {
        io_rep(singular, lm.inc);
        FAIL() << "expected an exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RankDeficiency);
    }
}
