#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace phfem;

namespace {

BoundaryPartition line_partition(const SimplexMesh& mesh) {
    CausalitySpec cs;
    cs.q_segments = {{0}};
    cs.p_segments = {{mesh.node_count() - 1}};
    return partition_boundary(mesh, cs);
}

SimplexMesh reference_triangle() {
    return mesh_from_entities(2, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1}, {1, 2}, {2, 0}}, {Face{{{{0, 1}, {1, 1}, {2, 1}}}}}, 1.0);
}

void expect_matches_quadrature(const SimplexMesh& mesh) {
    const IncidencePair inc = incidence(mesh);
    (void)inc;
    const GalerkinMatrices g = assemble(mesh, BoundaryPartition{}, FormDegreeSpec::planar());
    const oracle::QuadratureGalerkin q = oracle::planar_galerkin(mesh);
    EXPECT_LT(max_abs(Mat(Mat(g.M_p) - q.M_p)), 1e-9);
    EXPECT_LT(max_abs(Mat(Mat(g.M_q) - q.M_q)), 1e-9);
    EXPECT_LT(max_abs(Mat(Mat(g.K_p) - q.K_p)), 1e-9);
    EXPECT_LT(max_abs(Mat(Mat(g.K_q) - q.K_q)), 1e-9);
    EXPECT_LT(max_abs(Mat(Mat(g.L_p) - q.L_p)), 1e-9);
}

} // namespace

TEST(Whitney, ReferenceTriangleDerivativePairing) {
    // integral of d(lambda_0) ^ w^{0->1} over the reference triangle is 1/6
    const SimplexMesh mesh = reference_triangle();
    const GalerkinMatrices g = assemble(mesh, BoundaryPartition{}, FormDegreeSpec::planar());
    EXPECT_NEAR(Mat(g.K_p)(0, 0), -1.0 / 6.0, 1e-15);
    expect_matches_quadrature(mesh);
}

TEST(Whitney, AssembledMatricesMatchQuadrature) {
    expect_matches_quadrature(build_rect_mesh(3, 2, 0.7));
    expect_matches_quadrature(build_rect_mesh(1, 1, 2.0));
    expect_matches_quadrature(oracle::one_by_one_mesh(0.3));
}

TEST(Whitney, MassMatrixOfFaceFormsIsOneThird) {
    const GalerkinMatrices g = assemble(build_rect_mesh(4, 3, 0.2), BoundaryPartition{}, FormDegreeSpec::planar());
    const Mat mp(g.M_p);
    for (Eigen::Index f = 0; f < mp.cols(); ++f) {
        EXPECT_NEAR(mp.col(f).sum(), 1.0, 1e-15);
        EXPECT_EQ((mp.col(f).array() != 0.0).count(), 3);
        EXPECT_NEAR(mp.col(f).maxCoeff(), 1.0 / 3.0, 1e-15);
    }
}

TEST(Whitney, BasisFormsAreDualToTheirSimplices) {
    const SimplexMesh mesh = build_rect_mesh(2, 2, 0.5);
    for (int v = 0; v < mesh.node_count(); ++v)
        for (int w = 0; w < mesh.node_count(); ++w)
            EXPECT_NEAR(eval_whitney(mesh, FormKind::Node, v, mesh.nodes[w]).scalar, v == w ? 1.0 : 0.0, 1e-13);
    for (int e = 0; e < mesh.edge_count(); ++e)
        for (int c = 0; c < mesh.edge_count(); ++c) {
            const Point2 a = mesh.nodes[mesh.edges[c].tail], b = mesh.nodes[mesh.edges[c].head];
            double integral = 0.0;
            for (const auto& [s, wt] : oracle::gauss3()) {
                const WhitneyValue val = eval_whitney(mesh, FormKind::Edge, e, {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
                integral += wt * (val.cx * (b.x - a.x) + val.cy * (b.y - a.y));
            }
            EXPECT_NEAR(integral, e == c ? 1.0 : 0.0, 1e-13) << e << " on " << c;
        }
    const auto tris = oracle::triangles(mesh);
    for (int f = 0; f < mesh.face_count(); ++f) {
        double integral = 0.0;
        for (const auto& q : oracle::dunavant4()) {
            const auto& x = tris[f].x;
            const Point2 p{q.l1 * x[0].x + q.l2 * x[1].x + q.l3 * x[2].x, q.l1 * x[0].y + q.l2 * x[1].y + q.l3 * x[2].y};
            integral += q.weight * tris[f].area * eval_whitney(mesh, FormKind::Face, f, p).scalar;
        }
        EXPECT_NEAR(integral, 1.0, 1e-13);
    }
    EXPECT_EQ(eval_whitney(mesh, FormKind::Node, 0, {5.0, 5.0}).scalar, 0.0);
}

TEST(Whitney, LineBasisForms) {
    const SimplexMesh mesh = build_interval_mesh(4, 1.0);
    EXPECT_NEAR(eval_whitney(mesh, FormKind::Node, 1, {0.25, 0}).scalar, 1.0, 1e-15);
    EXPECT_NEAR(eval_whitney(mesh, FormKind::Node, 1, {0.125, 0}).scalar, 0.5, 1e-15);
    EXPECT_NEAR(eval_whitney(mesh, FormKind::Edge, 2, {0.6, 0}).cx, 4.0, 1e-15);
    EXPECT_EQ(eval_whitney(mesh, FormKind::Edge, 2, {0.1, 0}).cx, 0.0);
}

TEST(Whitney, StructuralIdentitiesOnLineMeshes) {
    for (int n = 2; n <= 80; ++n) {
        const SimplexMesh mesh = build_interval_mesh(n, 1.0);
        const BoundaryPartition part = line_partition(mesh);
        const GalerkinMatrices g = assemble(mesh, part, FormDegreeSpec::line());
        const StructureReport rep = verify_structure(mesh, g, incidence(mesh), FormDegreeSpec::line());
        EXPECT_TRUE(rep.pass(1e-12)) << "N=" << n << " residual " << rep.max_residual();
    }
}

TEST(Whitney, StructuralIdentitiesOnPlanarGrids) {
    for (int n = 1; n <= 6; ++n)
        for (int m = 1; m <= 6; ++m) {
            const SimplexMesh mesh = build_rect_mesh(n, m, 1.0 / n);
            const BoundaryPartition part = oracle::all_q_partition(mesh);
            const GalerkinMatrices g = assemble(mesh, part, FormDegreeSpec::planar());
            const StructureReport rep = verify_structure(mesh, g, incidence(mesh), FormDegreeSpec::planar());
            EXPECT_TRUE(rep.pass(1e-12)) << n << "x" << m << " residual " << rep.max_residual();
            EXPECT_EQ(rep.ranks_checked, n > 2 && m > 2);
            for (const RankCheck& rc : rep.ranks) EXPECT_TRUE(rc.pass()) << rc.matrix << " " << rc.actual << " vs " << rc.expected;
        }
}

TEST(Whitney, BoundarySegmentsPartitionTheBoundaryMatrix) {
    const SimplexMesh mesh = build_rect_mesh(2, 1, 1.0);
    const BoundaryPartition part = oracle::mixed_partition(mesh);
    const GalerkinMatrices g = assemble(mesh, part, FormDegreeSpec::planar());
    ASSERT_EQ(g.L_p_segments.size(), 1u);
    ASSERT_EQ(g.L_p_hat_segments.size(), 1u);
    const StructureReport rep = verify_structure(mesh, g, incidence(mesh), FormDegreeSpec::planar());
    EXPECT_LT(rep.segment_sum, 1e-15);
    // the p-causal segment only touches the bottom-left edge and its endpoints
    const Mat hat(g.L_p_hat_segments[0]);
    EXPECT_EQ((hat.array() != 0.0).count(), 2);
    EXPECT_NE(hat(0, 0), 0.0);
    EXPECT_NE(hat(1, 0), 0.0);
}

TEST(Whitney, BoundaryMatrixIsSupportedOnTheBoundary) {
    const SimplexMesh mesh = build_rect_mesh(3, 3, 1.0);
    const GalerkinMatrices g = assemble(mesh, oracle::all_q_partition(mesh), FormDegreeSpec::planar());
    const BoundaryInfo info = boundary_info(mesh);
    const std::set<int> bn(info.nodes.begin(), info.nodes.end()), be(info.edges.begin(), info.edges.end());
    for (int k = 0; k < g.L_p.outerSize(); ++k)
        for (SpMat::InnerIterator it(g.L_p, k); it; ++it) {
            EXPECT_TRUE(bn.count(static_cast<int>(it.row())));
            EXPECT_TRUE(be.count(static_cast<int>(it.col())));
        }
}

TEST(Whitney, OnlyTheImplementedDegreesAreAccepted) {
    const SimplexMesh mesh = build_rect_mesh(2, 2, 1.0);
    try {
        assemble(mesh, BoundaryPartition{}, FormDegreeSpec{1, 2, 2});
        FAIL() << "expected an exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnsupportedSpec);
    }
}
