#pragma once

// Image representation of the finite-dimensional Dirac structure and the explicit
// port-Hamiltonian state-space model derived from it.

#include "errors.hpp"
#include "hodge.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "power_maps.hpp"
#include "whitney.hpp"

#include <string>
#include <vector>

namespace phfem {

// Bond variables are ordered [f~p; f~q; f^_b; f_b] and [e~p; e~q; e^_b; e_b]. Both are images of the
// full effort vector [e_p; e_q]: flows = E^T e, efforts = F^T e. E and F have (M_p + M_q) rows.
struct ImageRep {
    SpMat E;
    SpMat F;
};

inline SpMat flow_image_transposed(const MapSet& m, const IncidencePair& inc) {
    const SpMat dp = to_real(inc.d_p), dq = to_real(inc.d_q);
    const Eigen::Index mp = m.sel.P_ep.cols(), mq = m.sel.P_eq.cols();
    const SpMat fp = m.sign_r * SpMat(m.P_fp * dp);
    const SpMat fq = m.P_fq * dq;
    return block_sparse({{zeros(fp.rows(), mp), fp},
                         {fq, zeros(fq.rows(), mq)},
                         {zeros(m.S_q_hat.rows(), mp), m.S_q_hat},
                         {m.S_p, zeros(m.S_p.rows(), mq)}});
}

inline SpMat effort_image_transposed(const MapSet& m) {
    const Eigen::Index mp = m.sel.P_ep.cols(), mq = m.sel.P_eq.cols();
    return block_sparse({{m.sel.P_ep, zeros(m.sel.P_ep.rows(), mq)},
                         {zeros(m.sel.P_eq.rows(), mp), m.sel.P_eq},
                         {m.sel.T_p_hat, zeros(m.sel.T_p_hat.rows(), mq)},
                         {zeros(m.sel.T_q.rows(), mp), m.sel.T_q}});
}

// Residual of E F^T + F E^T, which vanishes exactly when the maps preserve power.
inline double isotropy_residual(const ImageRep& rep) {
    const SpMat sym = SpMat(rep.E * rep.F.transpose()) + SpMat(rep.F * rep.E.transpose());
    return max_abs(sym);
}

inline ImageRep image_rep(const MapSet& m, const IncidencePair& inc, double tol = 1e-12) {
    const double res = power_preservation_residual(m, inc);
    require(res <= tol, ErrorKind::StructureViolation,
            "maps violate power preservation (residual " + std::to_string(res) + ")");
    ImageRep rep;
    rep.E = SpMat(flow_image_transposed(m, inc).transpose());
    rep.F = SpMat(effort_image_transposed(m).transpose());
    return rep;
}

// Rank of F equals rank [P_ep; T^_p] + rank [P_eq; T_q] by its block structure.
inline int effort_image_rank(const MapSet& m) {
    auto stacked_rank = [](const SpMat& top, const SpMat& bottom) {
        const SpMat pi = block_sparse({{top}, {bottom}});
        if (is_signed_permutation(pi)) return static_cast<int>(pi.rows());
        return numerical_rank(Mat(pi));
    };
    return stacked_rank(m.sel.P_ep, m.sel.T_p_hat) + stacked_rank(m.sel.P_eq, m.sel.T_q);
}

// ---------------------------------------------------------------------------------------------
// Input-output representation

struct IORep {
    SpMat J; // reduced efforts -> state rates, ordered [p; q]
    SpMat B; // inputs [e^_b; e_b] -> state rates
    SpMat C;
    SpMat D;
};

namespace detail {

// Inverse of a stacked selector [P_e; T]; a transpose for signed permutations, a dense inverse otherwise.
inline SpMat stacked_inverse(const SpMat& top, const SpMat& bottom) {
    const SpMat pi = block_sparse({{top}, {bottom}});
    require(pi.rows() == pi.cols(), ErrorKind::RankDeficiency, "stacked effort selector is not square");
    if (is_signed_permutation(pi)) return SpMat(pi.transpose());
    const Mat dense(pi);
    Eigen::FullPivLU<Mat> lu(dense);
    require(lu.isInvertible(), ErrorKind::RankDeficiency, "stacked effort selector is singular");
    return Mat(lu.inverse()).sparseView(1e-300, 1.0);
}

} // namespace detail

inline IORep io_rep(const MapSet& m, const IncidencePair& inc) {
    const SpMat dp = to_real(inc.d_p), dq = to_real(inc.d_q);
    const Eigen::Index np = m.sel.P_ep.rows(), nq = m.sel.P_eq.rows();
    const Eigen::Index in_p = m.sel.T_p_hat.rows(), in_q = m.sel.T_q.rows();
    const SpMat pi_q_inv = detail::stacked_inverse(m.sel.P_eq, m.sel.T_q);
    const SpMat pi_p_inv = detail::stacked_inverse(m.sel.P_ep, m.sel.T_p_hat);
    // [f~p; f^_b] = X [e~q; e_b] and [f~q; f_b] = Y [e~p; e^_b]
    const SpMat X = SpMat(block_sparse({{SpMat(m.sign_r * SpMat(m.P_fp * dp))}, {m.S_q_hat}}) * pi_q_inv);
    const SpMat Y = SpMat(block_sparse({{SpMat(m.P_fq * dq)}, {m.S_p}}) * pi_p_inv);
    const SpMat Jp = -sub_block(X, 0, 0, np, nq);
    const SpMat Bp = -sub_block(X, 0, nq, np, in_q);
    const SpMat Cq = sub_block(X, np, 0, in_p, nq);
    const SpMat Dq = sub_block(X, np, nq, in_p, in_q);
    const SpMat Jq = -sub_block(Y, 0, 0, nq, np);
    const SpMat Bq = -sub_block(Y, 0, np, nq, in_p);
    const SpMat Cp = sub_block(Y, nq, 0, in_q, np);
    const SpMat Dp = sub_block(Y, nq, np, in_q, in_p);
    IORep io;
    io.J = block_sparse({{zeros(np, np), Jp}, {Jq, zeros(nq, nq)}});
    io.B = block_sparse({{zeros(np, in_p), Bp}, {Bq, zeros(nq, in_q)}});
    io.C = block_sparse({{zeros(in_p, np), Cq}, {Cp, zeros(in_q, nq)}});
    io.D = block_sparse({{zeros(in_p, in_p), Dq}, {Dp, zeros(in_q, in_q)}});
    return io;
}

// ---------------------------------------------------------------------------------------------
// Port-Hamiltonian model

struct ModelLabels {
    std::vector<std::string> states;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

struct PHModel {
    SpMat J;
    SpMat B;
    SpMat C;
    SpMat D;
    Vec Q; // diagonal of blkdiag(Q_p, Q_q)
    ModelLabels labels;
    int p_states = 0; // leading block of the state vector

    Eigen::Index state_dim() const { return J.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }
    Eigen::Index output_dim() const { return C.rows(); }

    SpMat system_matrix() const { return SpMat(J * Q.asDiagonal()); }
    double hamiltonian(const Vec& x) const { return 0.5 * x.dot(Q.cwiseProduct(x)); }
    Vec output(const Vec& x, const Vec& u) const { return C * Q.cwiseProduct(x) + D * u; }
};

struct ModelResiduals {
    double J_skew = 0.0; // |J + J^T|
    double C_BT = 0.0;   // |C - B^T|
    double D_skew = 0.0; // |D + D^T|
    double max() const { return std::max({J_skew, C_BT, D_skew}); }
};

inline ModelResiduals model_residuals(const PHModel& m) {
    ModelResiduals r;
    r.J_skew = max_abs(SpMat(m.J + SpMat(m.J.transpose())));
    r.C_BT = max_abs(SpMat(m.C - SpMat(m.B.transpose())));
    r.D_skew = max_abs(SpMat(m.D + SpMat(m.D.transpose())));
    return r;
}

inline PHModel assemble_model(const IORep& io, const HodgePair& hodge, ModelLabels labels = {}) {
    const Eigen::Index n = hodge.Q_p.size() + hodge.Q_q.size();
    require(io.J.rows() == n && io.J.cols() == n, ErrorKind::InvalidArgument, "J and Hodge dimensions differ");
    require(io.B.rows() == n && io.C.cols() == n, ErrorKind::InvalidArgument, "B/C and state dimensions differ");
    require(io.C.rows() == io.B.cols() && io.D.rows() == io.C.rows() && io.D.cols() == io.B.cols(),
            ErrorKind::InvalidArgument, "port dimensions differ");
    PHModel m;
    m.J = io.J;
    m.B = io.B;
    m.C = io.C;
    m.D = io.D;
    m.Q.resize(n);
    m.Q << hodge.Q_p, hodge.Q_q;
    require((m.Q.array() > 0.0).all() && m.Q.allFinite(), ErrorKind::SingularHodge, "Hodge entries must be positive");
    m.p_states = static_cast<int>(hodge.Q_p.size());
    if (!labels.states.empty())
        require(static_cast<Eigen::Index>(labels.states.size()) == n, ErrorKind::InvalidArgument, "state label count");
    m.labels = std::move(labels);
    return m;
}

inline ModelLabels default_labels(const SimplexMesh& mesh, const MapSet& maps) {
    const std::string q_kind = mesh.dim == 2 ? "edge" : "node";
    ModelLabels l;
    for (int v : maps.sel.p_efforts) l.states.push_back("p_node_" + std::to_string(v));
    for (int e : maps.sel.q_efforts) l.states.push_back("q_" + q_kind + "_" + std::to_string(e));
    for (int v : maps.sel.p_inputs) l.inputs.push_back("ep_hat_node_" + std::to_string(v));
    for (int e : maps.sel.q_inputs) l.inputs.push_back("eq_" + q_kind + "_" + std::to_string(e));
    for (int v : maps.sel.p_inputs) l.outputs.push_back("fp_hat_node_" + std::to_string(v));
    for (int e : maps.sel.q_inputs) l.outputs.push_back("fq_" + q_kind + "_" + std::to_string(e));
    return l;
}

// |<e~p, f~p> + <e~q, f~q> + <e_b, f_b> + <e^_b, f^_b>| for flows generated from the trial efforts
// through the discrete conservation laws and the maps.
inline double power_balance_residual(const MapSet& m, const IncidencePair& inc, const Vec& e_p, const Vec& e_q) {
    const SpMat dp = to_real(inc.d_p), dq = to_real(inc.d_q);
    const Vec f_p = m.sign_r * (m.P_fp * (dp * e_q));
    const Vec f_q = m.P_fq * (dq * e_p);
    const Vec f_b = m.S_p * e_p;
    const Vec f_b_hat = m.S_q_hat * e_q;
    const Vec ep_red = m.sel.P_ep * e_p, eq_red = m.sel.P_eq * e_q;
    const Vec e_b = m.sel.T_q * e_q, e_b_hat = m.sel.T_p_hat * e_p;
    return std::abs(ep_red.dot(f_p) + eq_red.dot(f_q) + e_b.dot(f_b) + e_b_hat.dot(f_b_hat));
}

// ---------------------------------------------------------------------------------------------
// Whole pipeline for a planar grid: maps, Hodge matrices and the state-space model.

struct PlanarModel {
    SimplexMesh mesh;
    BoundaryPartition partition;
    IncidencePair inc;
    TriangleWeights weights;
    MapSet maps;
    HodgePair hodge;
    PHModel model;
};

inline PlanarModel build_planar_model(const SimplexMesh& mesh, const BoundaryPartition& part, const TriangleWeights& w) {
    PlanarModel pm;
    pm.mesh = mesh;
    pm.partition = part;
    pm.weights = w;
    pm.inc = incidence(mesh);
    pm.maps = build_maps(mesh, part, w, pm.inc, FormDegreeSpec::planar());
    pm.hodge = hodge_2d(mesh, pm.maps);
    pm.model = assemble_model(io_rep(pm.maps, pm.inc), pm.hodge, default_labels(mesh, pm.maps));
    return pm;
}

} // namespace phfem
