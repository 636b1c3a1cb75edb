#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace phfem;

namespace {

MapSet planar_maps(const SimplexMesh& mesh, const BoundaryPartition& part, const TriangleWeights& w) {
    return build_maps(mesh, part, w, incidence(mesh), FormDegreeSpec::planar());
}

} // namespace

TEST(Hodge, UniformDensityIsRecoveredAtEveryNode) {
    // a density rho has face integrals rho h^2 / 2; the weighted node flows divided back must return rho
    for (const char* preset : {"set1", "set2", "set3", "set4"}) {
        const SimplexMesh mesh = build_rect_mesh(4, 3, 0.3);
        const MapSet maps = planar_maps(mesh, oracle::all_q_partition(mesh), TriangleWeights::preset(preset));
        const HodgePair hodge = hodge_2d(mesh, maps);
        const double rho = 1.7;
        const Vec faces = Vec::Constant(mesh.face_count(), rho * mesh.h * mesh.h / 2.0);
        const Vec efforts = hodge.Q_p.cwiseProduct(maps.P_fp * faces);
        EXPECT_LT((efforts.array() - rho).abs().maxCoeff(), 1e-13) << preset;
    }
}

TEST(Hodge, ElementaryValuesForEqualWeights) {
    const SimplexMesh mesh = build_rect_mesh(2, 2, 0.5);
    const MapSet maps = planar_maps(mesh, oracle::all_q_partition(mesh), TriangleWeights::preset("set1"));
    const HodgePair hodge = hodge_2d(mesh, maps);
    const GridView g = classify_grid(mesh);
    for (std::size_t r = 0; r < maps.sel.p_efforts.size(); ++r) {
        const int v = maps.sel.p_efforts[r];
        const auto [i, j] = g.node_ij[v];
        // every node sees 1/3 of each adjacent face; interior nodes have six faces, corners one or two
        int faces = 0;
        for (int f = 0; f < mesh.face_count(); ++f)
            if (Mat(maps.P_fp_full)(v, f) != 0.0) ++faces;
        EXPECT_NEAR(hodge.Q_p(r), 2.0 / (0.25 * faces / 3.0), 1e-12) << i << "," << j;
    }
    for (std::size_t r = 0; r < maps.sel.q_efforts.size(); ++r)
        if (g.edge_info[maps.sel.q_efforts[r]].kind == EdgeKind::Diagonal) {
            EXPECT_NEAR(hodge.Q_q(r), 3.0, 1e-14);
        }
}

TEST(Hodge, EntriesArePositiveForAllPresets) {
    for (const char* preset : {"set1", "set2", "set3", "set4"})
        for (int n : {1, 3, 5}) {
            const SimplexMesh mesh = build_rect_mesh(n, n + 1, 1.0 / n);
            const MapSet maps = planar_maps(mesh, oracle::all_q_partition(mesh), TriangleWeights::preset(preset));
            const HodgePair hodge = hodge_2d(mesh, maps);
            EXPECT_EQ(hodge.Q_p.size(), maps.P_fp.rows());
            EXPECT_EQ(hodge.Q_q.size(), maps.P_fq.rows());
            EXPECT_GT(hodge.Q_p.minCoeff(), 0.0);
            EXPECT_GT(hodge.Q_q.minCoeff(), 0.0);
            EXPECT_TRUE(hodge.Q_p.allFinite() && hodge.Q_q.allFinite());
        }
}

TEST(Hodge, NodeWithoutAdjacentWeightIsDegenerate) {
    // gamma_I = 0 leaves the bottom-right corner without any face weight
    const SimplexMesh mesh = build_rect_mesh(2, 2, 1.0);
    const TriangleWeights w{0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0};
    const MapSet maps = planar_maps(mesh, oracle::all_q_partition(mesh), w);
    try {
        hodge_2d(mesh, maps);
        FAIL() << "expected an exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateWeights);
    }
}

TEST(Hodge, LineEntries) {
    const HodgePair central = hodge_1d(10, 0.0, 0.1);
    EXPECT_LT((central.Q_p.array() - 10.0).abs().maxCoeff(), 1e-12);
    EXPECT_LT((central.Q_q.array() - 10.0).abs().maxCoeff(), 1e-12);
    const HodgePair up = hodge_1d(10, 1.0 / 6.0, 0.1);
    EXPECT_NEAR(up.Q_p(0), 12.0, 1e-12);
    EXPECT_NEAR(up.Q_q(9), 12.0, 1e-12);
    EXPECT_NEAR(up.Q_p(9), 10.0, 1e-12);
    EXPECT_NEAR(up.Q_q(0), 10.0, 1e-12);
    const HodgePair down = hodge_1d(10, -1.0 / 12.0, 0.1);
    EXPECT_NEAR(down.Q_p(0), 120.0 / 13.0, 1e-12);
    for (double alpha : {1.0, 1.5}) {
        try {
            hodge_1d(10, alpha, 0.1);
            FAIL() << "expected an exception for alpha " << alpha;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::SingularHodge);
        }
    }
}
