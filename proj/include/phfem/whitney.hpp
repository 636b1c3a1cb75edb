#pragma once

// Lowest-order Whitney forms and the mixed-Galerkin matrices built from them.
// Integrals of products of barycentric coordinates are evaluated in closed form.

#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace phfem {

// Degrees of the two conserved quantities. The 2D wave system uses (p, q, n) = (2, 1, 2),
// the 1D transmission line (1, 1, 1).
struct FormDegreeSpec {
    int p = 2;
    int q = 1;
    int n = 2;

    int r() const { return p * q + 1; }
    int sign_r() const { return r() % 2 == 0 ? 1 : -1; } // (-1)^r

    static FormDegreeSpec planar() { return {2, 1, 2}; }
    static FormDegreeSpec line() { return {1, 1, 1}; }
};

inline int parity_sign(int k) { return k % 2 == 0 ? 1 : -1; }

struct GalerkinMatrices {
    SpMat M_p; // p-efforts x p-flows
    SpMat M_q; // q-efforts x q-flows
    SpMat K_p; // p-efforts x q-efforts
    SpMat K_q; // q-efforts x p-efforts
    std::vector<SpMat> L_p_segments;     // one per q-causal segment
    std::vector<SpMat> L_p_hat_segments; // one per p-causal segment
    SpMat L_p; // whole boundary
    SpMat L_q;
};

// ---------------------------------------------------------------------------------------------
// Triangle geometry

struct TriangleFrame {
    std::array<int, 3> v{};                  // counter-clockwise vertex order
    std::array<std::array<double, 2>, 3> grad{}; // gradients of the barycentric coordinates
    double area = 0.0;
};

inline TriangleFrame triangle_frame(const SimplexMesh& mesh, int f) {
    std::vector<int> verts;
    for (const SignedEdge& se : mesh.faces[f].edges)
        for (int v : {mesh.edges[se.edge].tail, mesh.edges[se.edge].head})
            if (std::find(verts.begin(), verts.end(), v) == verts.end()) verts.push_back(v);
    require(verts.size() == 3, ErrorKind::InvalidArgument, "face is not a triangle");
    TriangleFrame t;
    const Point2 a = mesh.nodes[verts[0]], b = mesh.nodes[verts[1]], c = mesh.nodes[verts[2]];
    const double twice = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (twice < 0.0) std::swap(verts[1], verts[2]);
    t.v = {verts[0], verts[1], verts[2]};
    t.area = 0.5 * std::abs(twice);
    for (int k = 0; k < 3; ++k) {
        const Point2& p1 = mesh.nodes[t.v[(k + 1) % 3]];
        const Point2& p2 = mesh.nodes[t.v[(k + 2) % 3]];
        // rotate the opposite edge by +90 degrees, scaled so that the gradient points into the triangle
        t.grad[k] = {-(p2.y - p1.y) / (2.0 * t.area), (p2.x - p1.x) / (2.0 * t.area)};
    }
    return t;
}

inline std::array<double, 3> barycentric(const SimplexMesh& mesh, const TriangleFrame& t, Point2 p) {
    std::array<double, 3> lam{};
    for (int k = 0; k < 3; ++k) {
        const Point2& o = mesh.nodes[t.v[(k + 1) % 3]];
        lam[k] = t.grad[k][0] * (p.x - o.x) + t.grad[k][1] * (p.y - o.y);
    }
    return lam;
}

inline double cross(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[1] - a[1] * b[0];
}

// ---------------------------------------------------------------------------------------------
// Pointwise evaluation

enum class FormKind { Node, Edge, Face };

// Node form: scalar. Edge form: 1-form components (cx, cy) in 2D, density cx in 1D. Face form: density.
struct WhitneyValue {
    double scalar = 0.0;
    double cx = 0.0;
    double cy = 0.0;
};

inline WhitneyValue eval_whitney(const SimplexMesh& mesh, FormKind kind, int index, Point2 p) {
    constexpr double tol = 1e-12;
    WhitneyValue out;
    if (mesh.dim == 1) {
        for (int e = 0; e < mesh.edge_count(); ++e) {
            const double xa = mesh.nodes[mesh.edges[e].tail].x, xb = mesh.nodes[mesh.edges[e].head].x;
            const double lo = std::min(xa, xb), hi = std::max(xa, xb);
            if (p.x < lo - tol || p.x > hi + tol) continue;
            const double len = hi - lo;
            if (kind == FormKind::Node) {
                if (mesh.edges[e].tail != index && mesh.edges[e].head != index) continue;
                const double xn = mesh.nodes[index].x;
                out.scalar = 1.0 - std::abs(p.x - xn) / len;
                return out;
            }
            if (kind == FormKind::Edge && e == index) {
                out.cx = (xb > xa ? 1.0 : -1.0) / len;
                return out;
            }
        }
        return out;
    }
    for (int f = 0; f < mesh.face_count(); ++f) {
        const TriangleFrame t = triangle_frame(mesh, f);
        const auto lam = barycentric(mesh, t, p);
        if (lam[0] < -tol || lam[1] < -tol || lam[2] < -tol) continue;
        auto local = [&](int node) {
            for (int k = 0; k < 3; ++k)
                if (t.v[k] == node) return k;
            return -1;
        };
        if (kind == FormKind::Node) {
            const int k = local(index);
            if (k < 0) continue;
            out.scalar = lam[k];
            return out;
        }
        if (kind == FormKind::Edge) {
            const int a = local(mesh.edges[index].tail), b = local(mesh.edges[index].head);
            if (a < 0 || b < 0) continue;
            out.cx = lam[a] * t.grad[b][0] - lam[b] * t.grad[a][0];
            out.cy = lam[a] * t.grad[b][1] - lam[b] * t.grad[a][1];
            return out;
        }
        if (f != index) continue;
        out.scalar = 1.0 / t.area;
        return out;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Assembly

namespace detail {

inline std::map<std::pair<int, int>, int> directed_edge_lookup(const SimplexMesh& mesh) {
    std::map<std::pair<int, int>, int> table;
    for (int e = 0; e < mesh.edge_count(); ++e) table[{mesh.edges[e].tail, mesh.edges[e].head}] = e;
    return table;
}

inline GalerkinMatrices assemble_planar(const SimplexMesh& mesh, const BoundaryPartition& part, const FormDegreeSpec& spec) {
    const int nn = mesh.node_count(), ne = mesh.edge_count(), nf = mesh.face_count();
    const double kp_sign = -parity_sign(spec.r() + spec.q);
    const double kq_sign = -parity_sign(spec.p);
    const double lp_sign = parity_sign(spec.r() + spec.q);
    const double lq_sign = parity_sign(spec.p);
    const auto edge_of = directed_edge_lookup(mesh);
    std::vector<Triplet> mp, mq, kp, kq;
    for (int f = 0; f < nf; ++f) {
        const TriangleFrame t = triangle_frame(mesh, f);
        const double A = t.area;
        auto moment = [A](int a, int b) { return A * (a == b ? 2.0 : 1.0) / 12.0; }; // integral of lam_a lam_b
        struct LocalEdge { int edge, a, b; };
        std::vector<LocalEdge> local;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b) continue;
                auto it = edge_of.find({t.v[a], t.v[b]});
                if (it != edge_of.end()) local.push_back({it->second, a, b});
            }
        require(local.size() == 3, ErrorKind::InvalidArgument, "triangle edges missing from the mesh");
        for (int k = 0; k < 3; ++k) mp.emplace_back(t.v[k], f, 1.0 / 3.0);
        for (const LocalEdge& e1 : local) {
            const auto& ga = t.grad[e1.a];
            const auto& gb = t.grad[e1.b];
            for (const LocalEdge& e2 : local) {
                const auto& gc = t.grad[e2.a];
                const auto& gd = t.grad[e2.b];
                // (lam_a gb - lam_b ga) ^ (lam_c gd - lam_d gc)
                const double v = moment(e1.a, e2.a) * cross(gb, gd) - moment(e1.a, e2.b) * cross(gb, gc) -
                                 moment(e1.b, e2.a) * cross(ga, gd) + moment(e1.b, e2.b) * cross(ga, gc);
                mq.emplace_back(e1.edge, e2.edge, v);
            }
            for (int k = 0; k < 3; ++k) {
                // d lam_k ^ (lam_a gb - lam_b ga), each barycentric integrating to A/3
                const double dn_we = A / 3.0 * (cross(t.grad[k], gb) - cross(t.grad[k], ga));
                kp.emplace_back(t.v[k], e1.edge, kp_sign * dn_we);
                // d w^e = 2 ga ^ gb is constant, paired with lam_k
                kq.emplace_back(e1.edge, t.v[k], kq_sign * 2.0 * cross(ga, gb) * A / 3.0);
            }
        }
    }
    GalerkinMatrices g;
    g.M_p = sparse_from(nn, nf, mp);
    g.M_q = sparse_from(ne, ne, mq);
    g.K_p = sparse_from(nn, ne, kp);
    g.K_q = sparse_from(ne, nn, kq);
    const BoundaryInfo info = boundary_info(mesh);
    // Tangential trace of an edge form on its own boundary edge is +-ds/|e|; the node hats integrate to 1/2.
    auto boundary_block = [&](const std::vector<int>& edges, double sign) {
        std::vector<Triplet> entries;
        for (int e : edges) {
            const double s = info.edge_orientation.at(e) * sign * 0.5;
            entries.emplace_back(mesh.edges[e].tail, e, s);
            entries.emplace_back(mesh.edges[e].head, e, s);
        }
        return sparse_from(nn, ne, entries);
    };
    for (const auto& seg : part.q_segments) g.L_p_segments.push_back(boundary_block(seg, lp_sign));
    for (const auto& seg : part.p_segment_edges) g.L_p_hat_segments.push_back(boundary_block(seg, lp_sign));
    g.L_p = boundary_block(info.edges, lp_sign);
    g.L_q = SpMat(boundary_block(info.edges, lq_sign).transpose());
    return g;
}

inline GalerkinMatrices assemble_line(const SimplexMesh& mesh, const BoundaryPartition& part, const FormDegreeSpec& spec) {
    const int nn = mesh.node_count(), ne = mesh.edge_count();
    const double kp_sign = -parity_sign(spec.r() + spec.q);
    const double kq_sign = -parity_sign(spec.p);
    const double lp_sign = parity_sign(spec.r() + spec.q);
    const double lq_sign = parity_sign(spec.p);
    std::vector<Triplet> mass, kp, kq;
    for (int e = 0; e < ne; ++e) {
        const int a = mesh.edges[e].tail, b = mesh.edges[e].head;
        const double dir = mesh.nodes[b].x > mesh.nodes[a].x ? 1.0 : -1.0;
        mass.emplace_back(a, e, 0.5);
        mass.emplace_back(b, e, 0.5);
        // along the edge, d lam_b = dir/len dx and d lam_a = -dir/len dx; each hat integrates to len/2
        for (int i : {a, b}) {
            const double di = (i == b ? 1.0 : -1.0) * dir;
            for (int j : {a, b}) {
                kp.emplace_back(i, j, kp_sign * di * 0.5); // d lam_i ^ lam_j
                kq.emplace_back(j, i, kq_sign * (j == b ? 1.0 : -1.0) * dir * 0.5); // d lam_j ^ lam_i
            }
        }
    }
    GalerkinMatrices g;
    g.M_p = sparse_from(nn, ne, mass);
    g.M_q = g.M_p;
    g.K_p = sparse_from(nn, nn, kp);
    g.K_q = sparse_from(nn, nn, kq);
    // Boundary of the interval: the outward orientation is -1 at the left end and +1 at the right end.
    double xmin = mesh.nodes.front().x, xmax = xmin;
    for (const Point2& p : mesh.nodes) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    auto outward = [&](int v) { return mesh.nodes[v].x > 0.5 * (xmin + xmax) ? 1.0 : -1.0; };
    auto point_block = [&](const std::vector<int>& pts, double sign) {
        std::vector<Triplet> entries;
        for (int v : pts) entries.emplace_back(v, v, sign * outward(v));
        return sparse_from(nn, nn, entries);
    };
    for (const auto& seg : part.q_segments) g.L_p_segments.push_back(point_block(seg, lp_sign));
    for (const auto& seg : part.p_segments) g.L_p_hat_segments.push_back(point_block(seg, lp_sign));
    const BoundaryInfo info = boundary_info(mesh);
    g.L_p = point_block(info.nodes, lp_sign);
    g.L_q = SpMat(point_block(info.nodes, lq_sign).transpose());
    return g;
}

} // namespace detail

inline GalerkinMatrices assemble(const SimplexMesh& mesh, const BoundaryPartition& part, const FormDegreeSpec& spec) {
    require(spec.p + spec.q == spec.n + 1, ErrorKind::UnsupportedSpec, "form degrees must satisfy p + q = n + 1");
    if (mesh.dim == 2 && spec.p == 2 && spec.q == 1 && spec.n == 2) return detail::assemble_planar(mesh, part, spec);
    if (mesh.dim == 1 && spec.p == 1 && spec.q == 1 && spec.n == 1) return detail::assemble_line(mesh, part, spec);
    throw Error(ErrorKind::UnsupportedSpec, "supported form degrees are (2,1) in 2D and (1,1) in 1D");
}

// ---------------------------------------------------------------------------------------------
// Structural checks

struct RankCheck {
    std::string matrix;
    int expected = 0;
    int actual = 0;
    bool pass() const { return expected == actual; }
};

struct StructureReport {
    double factorization_p = 0.0; // |K_p + L_p + (-1)^r M_p d_p|
    double factorization_q = 0.0; // |K_q + L_q + M_q d_q|
    double lemma = 0.0;           // |(K_p + L_p) + (K_q + L_q)^T - L_p|
    double transpose = 0.0;       // |L_p - L_q^T|
    double segment_sum = 0.0;     // |sum of segment matrices - L_p| (0 when the segments do not cover the boundary)
    long complex_violation = 0;   // max |d_p d_q| in integer arithmetic (2D only)
    std::vector<RankCheck> ranks;
    bool ranks_checked = false;

    double max_residual() const {
        return std::max({factorization_p, factorization_q, lemma, transpose, segment_sum});
    }
    bool pass(double tol = 1e-12) const {
        if (max_residual() > tol || complex_violation != 0) return false;
        for (const RankCheck& r : ranks)
            if (!r.pass()) return false;
        return true;
    }
};

inline StructureReport verify_structure(const SimplexMesh& mesh, const GalerkinMatrices& g, const IncidencePair& inc,
                                        const FormDegreeSpec& spec, bool check_ranks = true) {
    StructureReport rep;
    const SpMat dp = to_real(inc.d_p), dq = to_real(inc.d_q);
    const SpMat kpl = g.K_p + g.L_p;
    const SpMat kql = g.K_q + g.L_q;
    rep.factorization_p = max_abs(SpMat(kpl + spec.sign_r() * SpMat(g.M_p * dp)));
    rep.factorization_q = max_abs(SpMat(kql + SpMat(g.M_q * dq)));
    rep.lemma = max_abs(SpMat(kpl + SpMat(kql.transpose()) - g.L_p));
    rep.transpose = max_abs(SpMat(g.L_p - SpMat(g.L_q.transpose())));
    SpMat seg_sum(g.L_p.rows(), g.L_p.cols());
    for (const SpMat& s : g.L_p_segments) seg_sum += s;
    for (const SpMat& s : g.L_p_hat_segments) seg_sum += s;
    rep.segment_sum = max_abs(SpMat(seg_sum - g.L_p));
    if (mesh.dim == 2) {
        const IntSpMat prod = inc.d_p * inc.d_q;
        for (int k = 0; k < prod.outerSize(); ++k)
            for (IntSpMat::InnerIterator it(prod, k); it; ++it)
                rep.complex_violation = std::max<long>(rep.complex_violation, std::abs(it.value()));
    }
    // Closed-form ranks are stated for 2D grids with N, M > 2; dense SVDs are limited to small meshes.
    if (check_ranks && mesh.dim == 2 && mesh.grid_n > 2 && mesh.grid_m > 2 && mesh.edge_count() <= 400) {
        const int mp = mesh.node_count();
        rep.ranks_checked = true;
        rep.ranks.push_back({"M_p", mp - 2, numerical_rank(Mat(g.M_p))});
        rep.ranks.push_back({"K_p+L_p", mp - 2, numerical_rank(Mat(kpl))});
        rep.ranks.push_back({"d_p", mesh.face_count(), numerical_rank(Mat(dp))});
        rep.ranks.push_back({"M_q", 2 * (mp - 2), numerical_rank(Mat(g.M_q))});
        rep.ranks.push_back({"K_q+L_q", mp - 1, numerical_rank(Mat(kql))});
        rep.ranks.push_back({"d_q", mp - 1, numerical_rank(Mat(dq))});
        rep.ranks.push_back({"L_p", 2 * (mesh.grid_n + mesh.grid_m) - 1, numerical_rank(Mat(g.L_p))});
    }
    return rep;
}

} // namespace phfem
