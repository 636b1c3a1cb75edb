#pragma once

// Trace matrices, effort selectors, flow maps and boundary output matrices that satisfy the
// discrete power-preservation equation.

#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "whitney.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace phfem {

// Convex weights placed at the vertices of the two triangle classes of a grid cell.
// Lower triangles: bottom-left alpha_I, bottom-right gamma_I, top-right beta_I.
// Upper triangles: bottom-left beta_II, top-left gamma_II, top-right alpha_II.
struct TriangleWeights {
    double alpha_I = 1.0 / 3.0;
    double beta_I = 1.0 / 3.0;
    double alpha_II = 1.0 / 3.0;
    double beta_II = 1.0 / 3.0;

    double gamma_I() const { return 1.0 - alpha_I - beta_I; }
    double gamma_II() const { return 1.0 - alpha_II - beta_II; }
    double delta_I() const { return 0.125 + (alpha_I - beta_I) / 4.0; }
    double delta_II() const { return 0.125 + (alpha_II - beta_II) / 4.0; }
    double eps_I() const { return 0.125 - (alpha_I - beta_I) / 4.0; }
    double eps_II() const { return 0.125 - (alpha_II - beta_II) / 4.0; }

    // Rotational coefficients of opposite sign in the two classes.
    bool reasonable() const {
        auto sgn = [](double v) { return (v > 0) - (v < 0); };
        return sgn(delta_I()) == -sgn(delta_II()) && sgn(eps_I()) == -sgn(eps_II());
    }

    void validate() const {
        for (double v : {alpha_I, beta_I, gamma_I(), alpha_II, beta_II, gamma_II()})
            require(v >= -1e-15 && v <= 1.0 + 1e-15, ErrorKind::InvalidArgument,
                    "triangle weights must be convex (each in [0,1], summing to 1 per class)");
    }

    static TriangleWeights preset(const std::string& name) {
        if (name == "set1") return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        if (name == "set2") return {1.0 / 2.0, 1.0 / 4.0, 1.0 / 4.0, 1.0 / 2.0};
        if (name == "set3") return {2.0 / 3.0, 1.0 / 12.0, 1.0 / 12.0, 2.0 / 3.0};
        if (name == "set4") return {15.0 / 16.0, 1.0 / 32.0, 1.0 / 32.0, 15.0 / 16.0};
        throw Error(ErrorKind::InvalidArgument, "unknown weight preset '" + name + "'");
    }
};

struct Selectors {
    SpMat T_q;     // q-inputs x q-efforts
    SpMat T_p_hat; // p-inputs x p-efforts
    SpMat P_eq;    // reduced q-efforts x q-efforts
    SpMat P_ep;    // reduced p-efforts x p-efforts
    std::vector<int> q_inputs;  // entity per row of T_q
    std::vector<int> p_inputs;  // entity per row of T_p_hat
    std::vector<int> q_efforts; // entity per row of P_eq
    std::vector<int> p_efforts; // entity per row of P_ep
};

struct MapSet {
    Selectors sel;
    SpMat P_fp_full; // all p-effort nodes x p-flows, before deleting input rows
    SpMat P_fp;
    SpMat P_fq;
    SpMat P_fq_perp;
    SpMat P_fq_par;
    SpMat P_fq_rot;
    SpMat S_p;
    SpMat S_q_hat;
    int sign_r = -1; // (-1)^r
};

// ---------------------------------------------------------------------------------------------
// Selectors

// In 1D the trace of a node effort carries the outward-normal sign of the boundary power matrix:
// +1 at the left end and -1 at the right end.
inline Selectors build_selectors(const SimplexMesh& mesh, const BoundaryPartition& part) {
    Selectors s;
    s.q_inputs = part.q_inputs();
    s.p_inputs = part.p_inputs();
    const int mq = mesh.dim == 2 ? mesh.edge_count() : mesh.node_count();
    const int mp = mesh.node_count();
    const std::set<int> qin(s.q_inputs.begin(), s.q_inputs.end());
    const std::set<int> pin(s.p_inputs.begin(), s.p_inputs.end());
    for (int k = 0; k < mq; ++k)
        if (!qin.count(k)) s.q_efforts.push_back(k);
    for (int k = 0; k < mp; ++k)
        if (!pin.count(k)) s.p_efforts.push_back(k);
    auto trace_scale = [&](const std::vector<int>& ids) {
        std::vector<double> scale(ids.size(), 1.0);
        if (mesh.dim == 1)
            for (std::size_t r = 0; r < ids.size(); ++r) scale[r] = ids[r] == 0 ? 1.0 : -1.0;
        return scale;
    };
    s.T_q = selector(s.q_inputs, mq, trace_scale(s.q_inputs));
    s.T_p_hat = selector(s.p_inputs, mp, trace_scale(s.p_inputs));
    s.P_eq = selector(s.q_efforts, mq);
    s.P_ep = selector(s.p_efforts, mp);
    return s;
}

// ---------------------------------------------------------------------------------------------
// 2D flow maps

// Full p-flow map with one row per node, before input rows are deleted.
inline SpMat build_Pfp_full(const SimplexMesh& mesh, const TriangleWeights& w) {
    const GridView g = classify_grid(mesh);
    std::vector<Triplet> t;
    for (int j = 0; j < g.m; ++j)
        for (int i = 0; i < g.n; ++i) {
            const int lo = g.lower(i, j), up = g.upper(i, j);
            t.emplace_back(g.node(i, j), lo, w.alpha_I);
            t.emplace_back(g.node(i + 1, j), lo, w.gamma_I());
            t.emplace_back(g.node(i + 1, j + 1), lo, w.beta_I);
            t.emplace_back(g.node(i, j), up, w.beta_II);
            t.emplace_back(g.node(i, j + 1), up, w.gamma_II());
            t.emplace_back(g.node(i + 1, j + 1), up, w.alpha_II);
        }
    return sparse_from(mesh.node_count(), mesh.face_count(), t);
}

inline SpMat build_Pfp(const SimplexMesh& mesh, const BoundaryPartition& part, const TriangleWeights& w) {
    w.validate();
    const Selectors s = build_selectors(mesh, part);
    return SpMat(s.P_ep * build_Pfp_full(mesh, w));
}

namespace detail {

using SparseRow = std::map<int, double>;

inline void add_to(SparseRow& row, int col, double v) {
    if (v != 0.0) row[col] += v;
}

// Stencil rows are written in the canonical orientation of the grid; this adds an entry on an
// actual mesh edge, converting by the edge's orientation sign.
struct RowBuilder {
    const GridView& g;
    double row_sign;
    SparseRow perp, par, rot;

    void put(SparseRow& row, int edge, double v) const { add_to(row, edge, row_sign * g.edge_info[edge].sign * v); }
    // counter-clockwise boundary cycle of cell (i, j), scaled by c
    void cycle(int i, int j, double c) {
        put(rot, g.horizontal(i, j), -c);
        put(rot, g.vertical(i + 1, j), c);
        put(rot, g.horizontal(i, j + 1), c);
        put(rot, g.vertical(i, j), -c);
    }
};

inline SparseRow times_dq(const SimplexMesh& mesh, const SparseRow& row) {
    SparseRow out;
    for (const auto& [e, v] : row) {
        out[mesh.edges[e].head] += v;
        out[mesh.edges[e].tail] -= v;
    }
    return out;
}

} // namespace detail

struct FlowMapResult {
    SpMat P_fq, P_fq_perp, P_fq_par, P_fq_rot, S_p, S_q_hat;
};

// Builds P_fq from the translated per-edge stencils and the output matrices from the
// power-preservation equation. Interior rows must solve P_fq d_q = -(-1)^r P_eq d_p^T P_fp^T exactly
// on every non-input node column; boundary effort edges place the unavoidable defect on input nodes.
inline FlowMapResult solve_Pfq_and_outputs(const SimplexMesh& mesh, const TriangleWeights& w, const IncidencePair& inc,
                                           const SpMat& P_fp_full, const Selectors& sel, int sign_r) {
    const GridView g = classify_grid(mesh);
    const int ne = mesh.edge_count();
    const std::set<int> p_input_set(sel.p_inputs.begin(), sel.p_inputs.end());
    const SpMat dp = to_real(inc.d_p), dq = to_real(inc.d_q);
    // right-hand side for every edge row: -(-1)^r d_p^T P_fp_full^T, edges x nodes
    const Eigen::SparseMatrix<double, Eigen::RowMajor> rhs = -sign_r * SpMat(dp.transpose() * P_fp_full.transpose());
    std::vector<Triplet> perp_t, par_t, rot_t;
    for (std::size_t r = 0; r < sel.q_efforts.size(); ++r) {
        const int e = sel.q_efforts[r];
        const GridEdge& info = g.edge_info[e];
        detail::RowBuilder b{g, static_cast<double>(info.sign), {}, {}, {}};
        const int i = info.i, j = info.j;
        bool interior = true;
        if (info.kind == EdgeKind::Diagonal) {
            b.put(b.perp, g.horizontal(i, j), -w.gamma_I() / 2);
            b.put(b.perp, g.vertical(i + 1, j), -w.gamma_I() / 2);
            b.put(b.perp, g.horizontal(i, j + 1), -w.gamma_II() / 2);
            b.put(b.perp, g.vertical(i, j), -w.gamma_II() / 2);
            b.put(b.par, e, ((w.alpha_I - w.beta_I) + (w.alpha_II - w.beta_II)) / 2);
        } else if (info.kind == EdgeKind::Vertical) {
            const bool left = g.has_cell(i - 1, j), right = g.has_cell(i, j);
            if (left) {
                b.put(b.perp, g.horizontal(i - 1, j), w.alpha_I);
                b.cycle(i - 1, j, w.delta_I());
            }
            if (right) {
                b.put(b.perp, g.horizontal(i, j + 1), w.alpha_II);
                b.cycle(i, j, -w.delta_II());
            }
            interior = left && right;
            if (interior) b.put(b.par, e, w.beta_I + w.beta_II - 1.0);
        } else {
            const bool below = g.has_cell(i, j - 1), above = g.has_cell(i, j);
            if (below) {
                b.put(b.perp, g.vertical(i, j - 1), -w.beta_II);
                b.cycle(i, j - 1, -w.eps_II());
            }
            if (above) {
                b.put(b.perp, g.vertical(i + 1, j), -w.beta_I);
                b.cycle(i, j, w.eps_I());
            }
            interior = below && above;
            if (interior) b.put(b.par, e, 1.0 - w.alpha_I - w.alpha_II);
        }
        auto rhs_at = [&](int node) { return rhs.coeff(e, node); };
        if (!interior) {
            // A boundary edge that is not a q-input: choose the own-edge weight so that the
            // mismatch against the right-hand side lands only on p-input endpoints.
            const detail::SparseRow base = detail::times_dq(mesh, b.perp);
            const int tail = mesh.edges[e].tail, head = mesh.edges[e].head;
            auto at = [](const detail::SparseRow& row, int k) {
                auto it = row.find(k);
                return it == row.end() ? 0.0 : it->second;
            };
            const double d_tail = at(base, tail) - rhs_at(tail);
            const double d_head = at(base, head) - rhs_at(head);
            const bool in_tail = p_input_set.count(tail) > 0, in_head = p_input_set.count(head) > 0;
            double z = 0.0;
            if (in_tail && in_head) z = (d_tail - d_head) / 2;
            else if (in_tail) z = -d_head;
            else if (in_head) z = d_tail;
            else
                throw Error(ErrorKind::InvalidArgument, "boundary effort edge " + std::to_string(e) +
                                                            " has no p-input endpoint; make it a q-input");
            detail::add_to(b.par, e, z);
        }
        // consistency on non-input node columns
        detail::SparseRow full = b.perp;
        for (const auto& [k, v] : b.par) full[k] += v;
        for (const auto& [k, v] : b.rot) full[k] += v;
        detail::SparseRow lhs = detail::times_dq(mesh, full);
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rhs, e); it; ++it) lhs[it.col()] -= it.value();
        for (const auto& [node, v] : lhs)
            if (!p_input_set.count(node) && std::abs(v) > 1e-12)
                throw Error(ErrorKind::InternalConsistency,
                            "flow map row for edge " + std::to_string(e) + " misses the right-hand side at node " +
                                std::to_string(node));
        for (const auto& [k, v] : b.perp) perp_t.emplace_back(static_cast<int>(r), k, v);
        for (const auto& [k, v] : b.par) par_t.emplace_back(static_cast<int>(r), k, v);
        for (const auto& [k, v] : b.rot) rot_t.emplace_back(static_cast<int>(r), k, v);
    }
    FlowMapResult out;
    const auto nq = static_cast<Eigen::Index>(sel.q_efforts.size());
    out.P_fq_perp = sparse_from(nq, ne, perp_t);
    out.P_fq_par = sparse_from(nq, ne, par_t);
    out.P_fq_rot = sparse_from(nq, ne, rot_t);
    out.P_fq = out.P_fq_perp + out.P_fq_par + out.P_fq_rot;
    out.P_fq.prune(1e-15, 1.0);
    out.S_p = -sign_r * SpMat(sel.T_q * dp.transpose() * P_fp_full.transpose());
    // S_q_hat = (-1)^r T_p_hat [d_q^T P_fq^T, S_p^T] [P_eq; T_q]
    const SpMat lifted = SpMat(dq.transpose() * out.P_fq.transpose() * sel.P_eq) + SpMat(out.S_p.transpose() * sel.T_q);
    out.S_q_hat = sign_r * SpMat(sel.T_p_hat * lifted);
    return out;
}

// ---------------------------------------------------------------------------------------------
// 1D maps

// Upwind-weighted maps for the interval with the left end q-causal and the right end p-causal.
inline MapSet build_1d_maps(const SimplexMesh& mesh, double alpha) {
    require(mesh.dim == 1, ErrorKind::InvalidArgument, "1D maps need an interval mesh");
    const int n = mesh.edge_count();
    const int last = mesh.node_count() - 1;
    BoundaryPartition part;
    part.q_segments = {{0}};
    part.p_segments = {{last}};
    MapSet maps;
    maps.sign_r = 1;
    maps.sel = build_selectors(mesh, part);
    std::vector<Triplet> pfq, sp, sq;
    for (int k = 0; k < n; ++k) {
        pfq.emplace_back(k, k, 1.0 - alpha);
        if (k + 1 < n) pfq.emplace_back(k, k + 1, alpha);
    }
    maps.P_fq = sparse_from(n, n, pfq);
    maps.P_fp = SpMat(maps.P_fq.transpose());
    maps.P_fp_full = maps.P_fp;
    maps.P_fq_perp = maps.P_fq;
    maps.P_fq_par = zeros(n, n);
    maps.P_fq_rot = zeros(n, n);
    sp.emplace_back(0, 0, 1.0 - alpha);
    sp.emplace_back(0, 1, alpha);
    sq.emplace_back(0, last - 1, alpha);
    sq.emplace_back(0, last, 1.0 - alpha);
    maps.S_p = sparse_from(1, last + 1, sp);
    maps.S_q_hat = sparse_from(1, last + 1, sq);
    return maps;
}

// ---------------------------------------------------------------------------------------------
// Full construction and checks

inline MapSet build_maps(const SimplexMesh& mesh, const BoundaryPartition& part, const TriangleWeights& w,
                         const IncidencePair& inc, const FormDegreeSpec& spec) {
    require(mesh.dim == 2, ErrorKind::UnsupportedSpec, "use build_1d_maps for interval meshes");
    w.validate();
    MapSet maps;
    maps.sign_r = spec.sign_r();
    maps.sel = build_selectors(mesh, part);
    maps.P_fp_full = build_Pfp_full(mesh, w);
    maps.P_fp = SpMat(maps.sel.P_ep * maps.P_fp_full);
    FlowMapResult fr = solve_Pfq_and_outputs(mesh, w, inc, maps.P_fp_full, maps.sel, maps.sign_r);
    maps.P_fq = fr.P_fq;
    maps.P_fq_perp = fr.P_fq_perp;
    maps.P_fq_par = fr.P_fq_par;
    maps.P_fq_rot = fr.P_fq_rot;
    maps.S_p = fr.S_p;
    maps.S_q_hat = fr.S_q_hat;
    return maps;
}

// Max-abs of (-1)^r d_p^T P_fp^T P_ep + P_eq^T P_fq d_q + T_q^T S_p + S_q_hat^T T_p_hat.
inline double power_preservation_residual(const MapSet& m, const IncidencePair& inc) {
    const SpMat dp = to_real(inc.d_p), dq = to_real(inc.d_q);
    const SpMat res = m.sign_r * SpMat(dp.transpose() * m.P_fp.transpose() * m.sel.P_ep) +
                      SpMat(m.sel.P_eq.transpose() * m.P_fq * dq) + SpMat(m.sel.T_q.transpose() * m.S_p) +
                      SpMat(m.S_q_hat.transpose() * m.sel.T_p_hat);
    return max_abs(res);
}

// Cross-check against a generic minimum-norm solution of the flow-map equation on non-input node
// columns: the stencil rows and the least-squares rows must differ only by left-null vectors of the
// restricted d_q. Returns the max-abs of (P_fq - P_min) d_q restricted. Dense; intended for small meshes.
inline double min_norm_crosscheck(const MapSet& m, const IncidencePair& inc) {
    const Mat dq = Mat(to_real(inc.d_q));
    const Mat rhs = -m.sign_r * Mat(m.sel.P_eq) * Mat(to_real(inc.d_p)).transpose() * Mat(m.P_fp_full).transpose();
    const Mat dq_r = dq * Mat(m.sel.P_ep).transpose();
    const Mat rhs_r = rhs * Mat(m.sel.P_ep).transpose();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(dq_r.transpose());
    const Mat p_min = cod.solve(rhs_r.transpose()).transpose();
    const Mat fit = p_min * dq_r - rhs_r;
    require(max_abs(fit) < 1e-10, ErrorKind::InternalConsistency, "flow-map equation has no exact solution");
    return max_abs(Mat((Mat(m.P_fq) - p_min) * dq_r));
}

} // namespace phfem
