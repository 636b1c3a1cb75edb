#pragma once

// Diagonal discrete Hodge matrices relating the reduced states to the reduced co-states.

#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "power_maps.hpp"

#include <cmath>

namespace phfem {

struct HodgePair {
    Vec Q_p; // diagonal entries, one per reduced p-effort
    Vec Q_q; // diagonal entries, one per reduced q-effort
};

// Node entries are normalized by the P_fp row sum, edge entries by the absolute perpendicular
// stencil weight, with a factor 2 for diagonal edges.
inline HodgePair hodge_2d(const SimplexMesh& mesh, const MapSet& maps) {
    const GridView g = classify_grid(mesh);
    const double h = mesh.h;
    HodgePair out;
    out.Q_p.resize(maps.P_fp.rows());
    out.Q_q.resize(maps.P_fq_perp.rows());
    const Eigen::SparseMatrix<double, Eigen::RowMajor> pfp = maps.P_fp;
    const Eigen::SparseMatrix<double, Eigen::RowMajor> perp = maps.P_fq_perp;
    for (Eigen::Index r = 0; r < pfp.rows(); ++r) {
        double sum = 0.0;
        for (decltype(pfp)::InnerIterator it(pfp, r); it; ++it) sum += it.value();
        require(sum > 1e-14, ErrorKind::DegenerateWeights,
                "node " + std::to_string(maps.sel.p_efforts[r]) + " has zero adjacent face weight");
        out.Q_p(r) = 2.0 / (h * h * sum);
    }
    for (Eigen::Index r = 0; r < perp.rows(); ++r) {
        double sum = 0.0;
        for (decltype(perp)::InnerIterator it(perp, r); it; ++it) sum += std::abs(it.value());
        const int e = maps.sel.q_efforts[r];
        require(sum > 1e-14, ErrorKind::DegenerateWeights,
                "edge " + std::to_string(e) + " has zero perpendicular stencil weight");
        const double factor = g.edge_info[e].kind == EdgeKind::Diagonal ? 2.0 : 1.0;
        out.Q_q(r) = factor / sum;
    }
    return out;
}

inline HodgePair hodge_1d(int n, double alpha, double h) {
    require(n >= 2, ErrorKind::InvalidArgument, "need at least two elements");
    require(h > 0.0, ErrorKind::InvalidArgument, "element size must be positive");
    require(alpha < 1.0, ErrorKind::SingularHodge, "alpha must be below 1 for a finite Hodge matrix");
    HodgePair out;
    out.Q_p = Vec::Constant(n, 1.0 / h);
    out.Q_q = Vec::Constant(n, 1.0 / h);
    out.Q_p(0) /= (1.0 - alpha);
    out.Q_q(n - 1) /= (1.0 - alpha);
    return out;
}

} // namespace phfem
