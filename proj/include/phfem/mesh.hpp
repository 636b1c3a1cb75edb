#pragma once

// Oriented simplicial meshes: rectangular triangulations in 2D and interval chains in 1D,
// their incidence matrices, and the segmentation of the boundary into input causalities.

#include "errors.hpp"
#include "linalg.hpp"

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace phfem {

inline constexpr const char* kNumberingVersion = "phfem-grid-v1";

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Edge {
    int tail = 0;
    int head = 0;
};

struct SignedEdge {
    int edge = 0;
    int sign = 1;
};

struct Face {
    std::array<SignedEdge, 3> edges;
};

struct SimplexMesh {
    int dim = 2;
    std::vector<Point2> nodes;
    std::vector<Edge> edges;
    std::vector<Face> faces; // empty in 1D, where the edges carry both flow families
    double h = 1.0;
    int grid_n = 0;
    int grid_m = 0;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
};

struct IncidencePair {
    IntSpMat d_p; // 2D: faces x edges; 1D: edges x nodes
    IntSpMat d_q; // edges x nodes
};

// ---------------------------------------------------------------------------------------------
// Construction

namespace detail {

inline void validate_mesh(const SimplexMesh& mesh) {
    require(mesh.dim == 1 || mesh.dim == 2, ErrorKind::InvalidArgument, "mesh dimension must be 1 or 2");
    require(mesh.h > 0.0 && std::isfinite(mesh.h), ErrorKind::InvalidArgument, "cell size must be positive");
    const int nn = mesh.node_count();
    for (const Edge& e : mesh.edges)
        require(e.tail >= 0 && e.tail < nn && e.head >= 0 && e.head < nn && e.tail != e.head,
                ErrorKind::InvalidArgument, "edge references a missing node");
    for (const Face& f : mesh.faces) {
        std::map<int, int> balance;
        for (const SignedEdge& se : f.edges) {
            require(se.edge >= 0 && se.edge < mesh.edge_count() && (se.sign == 1 || se.sign == -1),
                    ErrorKind::InvalidArgument, "face references a missing edge");
            const Edge& e = mesh.edges[se.edge];
            balance[e.head] += se.sign;
            balance[e.tail] -= se.sign;
        }
        for (const auto& [node, b] : balance)
            require(b == 0, ErrorKind::InvalidArgument, "face edge cycle is not closed");
    }
}

} // namespace detail

// Canonical numbering: nodes row-major from the bottom-left corner; horizontal edges (pointing
// to the left node), then vertical edges (pointing up), then one diagonal per cell (pointing from
// the top-right to the bottom-left corner); lower triangles of all cells, then upper triangles.
inline SimplexMesh build_rect_mesh(int n, int m, double h) {
    require(n >= 1 && m >= 1, ErrorKind::InvalidArgument, "grid needs at least one cell per direction");
    require(h > 0.0 && std::isfinite(h), ErrorKind::InvalidArgument, "cell size must be positive");
    SimplexMesh mesh;
    mesh.dim = 2;
    mesh.h = h;
    mesh.grid_n = n;
    mesh.grid_m = m;
    auto node = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= n; ++i) mesh.nodes.push_back({i * h, j * h});
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i < n; ++i) mesh.edges.push_back({node(i + 1, j), node(i, j)});
    for (int j = 0; j < m; ++j)
        for (int i = 0; i <= n; ++i) mesh.edges.push_back({node(i, j), node(i, j + 1)});
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) mesh.edges.push_back({node(i + 1, j + 1), node(i, j)});
    const int vertical0 = (m + 1) * n;
    const int diagonal0 = vertical0 + m * (n + 1);
    auto hor = [n](int i, int j) { return j * n + i; };
    auto ver = [n, vertical0](int i, int j) { return vertical0 + j * (n + 1) + i; };
    auto dia = [n, diagonal0](int i, int j) { return diagonal0 + j * n + i; };
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            mesh.faces.push_back(Face{{SignedEdge{hor(i, j), -1}, SignedEdge{ver(i + 1, j), 1}, SignedEdge{dia(i, j), 1}}});
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            mesh.faces.push_back(Face{{SignedEdge{dia(i, j), -1}, SignedEdge{hor(i, j + 1), 1}, SignedEdge{ver(i, j), -1}}});
    return mesh;
}

inline SimplexMesh build_interval_mesh(int n, double length) {
    require(n >= 2, ErrorKind::InvalidArgument, "interval mesh needs at least two edges");
    require(length > 0.0 && std::isfinite(length), ErrorKind::InvalidArgument, "interval length must be positive");
    SimplexMesh mesh;
    mesh.dim = 1;
    mesh.h = length / n;
    mesh.grid_n = n;
    mesh.grid_m = 0;
    for (int i = 0; i <= n; ++i) mesh.nodes.push_back({i * mesh.h, 0.0});
    for (int i = 0; i < n; ++i) mesh.edges.push_back({i, i + 1});
    return mesh;
}

// Mesh with caller-supplied numbering and orientations; used for hand-labelled examples.
inline SimplexMesh mesh_from_entities(int dim, std::vector<Point2> nodes, std::vector<Edge> edges,
                                      std::vector<Face> faces, double h) {
    SimplexMesh mesh;
    mesh.dim = dim;
    mesh.nodes = std::move(nodes);
    mesh.edges = std::move(edges);
    mesh.faces = std::move(faces);
    mesh.h = h;
    detail::validate_mesh(mesh);
    return mesh;
}

// ---------------------------------------------------------------------------------------------
// Incidence

inline IncidencePair incidence(const SimplexMesh& mesh) {
    const int nn = mesh.node_count();
    const int ne = mesh.edge_count();
    std::vector<Eigen::Triplet<int>> dq;
    for (int e = 0; e < ne; ++e) {
        dq.emplace_back(e, mesh.edges[e].tail, -1);
        dq.emplace_back(e, mesh.edges[e].head, 1);
    }
    IncidencePair inc;
    inc.d_q.resize(ne, nn);
    inc.d_q.setFromTriplets(dq.begin(), dq.end());
    if (mesh.dim == 1) {
        inc.d_p = inc.d_q;
        return inc;
    }
    std::vector<Eigen::Triplet<int>> dp;
    for (int f = 0; f < mesh.face_count(); ++f)
        for (const SignedEdge& se : mesh.faces[f].edges) dp.emplace_back(f, se.edge, se.sign);
    inc.d_p.resize(mesh.face_count(), ne);
    inc.d_p.setFromTriplets(dp.begin(), dp.end());
    return inc;
}

// ---------------------------------------------------------------------------------------------
// Boundary structure

struct BoundaryInfo {
    std::vector<int> edges;              // 2D boundary edges, ascending
    std::vector<int> nodes;              // boundary nodes, ascending
    std::map<int, int> edge_orientation; // +1 if the edge runs counter-clockwise along the boundary
};

inline BoundaryInfo boundary_info(const SimplexMesh& mesh) {
    BoundaryInfo info;
    if (mesh.dim == 1) {
        std::vector<int> degree(mesh.node_count(), 0);
        for (const Edge& e : mesh.edges) {
            ++degree[e.tail];
            ++degree[e.head];
        }
        for (int v = 0; v < mesh.node_count(); ++v)
            if (degree[v] == 1) info.nodes.push_back(v);
        return info;
    }
    std::vector<int> count(mesh.edge_count(), 0);
    std::vector<int> sign(mesh.edge_count(), 0);
    for (const Face& f : mesh.faces) {
        double twice_area = 0.0;
        for (const SignedEdge& se : f.edges) {
            const Edge& e = mesh.edges[se.edge];
            const Point2& a = mesh.nodes[se.sign > 0 ? e.tail : e.head];
            const Point2& b = mesh.nodes[se.sign > 0 ? e.head : e.tail];
            twice_area += a.x * b.y - b.x * a.y;
        }
        const int face_orientation = twice_area > 0.0 ? 1 : -1;
        for (const SignedEdge& se : f.edges) {
            ++count[se.edge];
            sign[se.edge] = se.sign * face_orientation;
        }
    }
    std::set<int> nodes;
    for (int e = 0; e < mesh.edge_count(); ++e)
        if (count[e] == 1) {
            info.edges.push_back(e);
            info.edge_orientation[e] = sign[e];
            nodes.insert(mesh.edges[e].tail);
            nodes.insert(mesh.edges[e].head);
        }
    info.nodes.assign(nodes.begin(), nodes.end());
    return info;
}

// ---------------------------------------------------------------------------------------------
// Rectangular grid view: recovers (i, j) positions, edge kinds and orientation signs from the
// coordinates, so that algorithms written for the canonical layout also work for meshes with a
// different numbering.

enum class EdgeKind { Horizontal, Vertical, Diagonal };

struct GridEdge {
    EdgeKind kind = EdgeKind::Horizontal;
    int i = 0; // cell column of the edge (left node for horizontal, node column for vertical)
    int j = 0; // row (node row for horizontal, cell row for vertical and diagonal)
    int sign = 1; // +1 when the edge follows the canonical orientation of its kind
};

struct GridFace {
    bool upper = false;
    int i = 0;
    int j = 0;
};

class GridView {
public:
    int n = 0;
    int m = 0;
    double h = 1.0;
    std::vector<std::array<int, 2>> node_ij;
    std::vector<GridEdge> edge_info;
    std::vector<GridFace> face_info;

    int node(int i, int j) const { return lookup(nodes_, i, j, "node"); }
    int horizontal(int i, int j) const { return lookup(hor_, i, j, "horizontal edge"); }
    int vertical(int i, int j) const { return lookup(ver_, i, j, "vertical edge"); }
    int diagonal(int i, int j) const { return lookup(dia_, i, j, "diagonal edge"); }
    int lower(int i, int j) const { return lookup(low_, i, j, "lower face"); }
    int upper(int i, int j) const { return lookup(up_, i, j, "upper face"); }
    bool has_cell(int i, int j) const { return i >= 0 && j >= 0 && i < n && j < m; }

    friend GridView classify_grid(const SimplexMesh& mesh);

private:
    using Key = std::pair<int, int>;
    std::map<Key, int> nodes_, hor_, ver_, dia_, low_, up_;

    static int lookup(const std::map<Key, int>& table, int i, int j, const char* what) {
        auto it = table.find({i, j});
        if (it == table.end())
            throw Error(ErrorKind::InvalidArgument, std::string("grid has no ") + what + " at (" +
                                                        std::to_string(i) + "," + std::to_string(j) + ")");
        return it->second;
    }
};

inline GridView classify_grid(const SimplexMesh& mesh) {
    require(mesh.dim == 2, ErrorKind::UnsupportedSpec, "grid classification needs a 2D mesh");
    GridView g;
    g.h = mesh.h;
    double x0 = mesh.nodes.front().x, y0 = mesh.nodes.front().y;
    for (const Point2& p : mesh.nodes) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
    }
    for (int v = 0; v < mesh.node_count(); ++v) {
        const double fi = (mesh.nodes[v].x - x0) / mesh.h;
        const double fj = (mesh.nodes[v].y - y0) / mesh.h;
        const int i = static_cast<int>(std::lround(fi));
        const int j = static_cast<int>(std::lround(fj));
        require(std::abs(fi - i) < 1e-9 && std::abs(fj - j) < 1e-9, ErrorKind::InvalidArgument,
                "node is not on the square lattice of size h");
        require(g.nodes_.emplace(std::make_pair(i, j), v).second, ErrorKind::InvalidArgument, "duplicate grid node");
        g.node_ij.push_back({i, j});
        g.n = std::max(g.n, i);
        g.m = std::max(g.m, j);
    }
    require(mesh.node_count() == (g.n + 1) * (g.m + 1), ErrorKind::InvalidArgument, "nodes do not fill a rectangle");
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const auto& t = g.node_ij[mesh.edges[e].tail];
        const auto& hd = g.node_ij[mesh.edges[e].head];
        const int dx = hd[0] - t[0], dy = hd[1] - t[1];
        GridEdge info;
        if (dy == 0 && std::abs(dx) == 1) {
            info = {EdgeKind::Horizontal, std::min(t[0], hd[0]), t[1], -dx};
            g.hor_[{info.i, info.j}] = e;
        } else if (dx == 0 && std::abs(dy) == 1) {
            info = {EdgeKind::Vertical, t[0], std::min(t[1], hd[1]), dy};
            g.ver_[{info.i, info.j}] = e;
        } else if (dx == dy && std::abs(dx) == 1) {
            info = {EdgeKind::Diagonal, std::min(t[0], hd[0]), std::min(t[1], hd[1]), -dx};
            g.dia_[{info.i, info.j}] = e;
        } else {
            throw Error(ErrorKind::UnsupportedSpec, "edge is neither an axis edge nor a bottom-left/top-right diagonal");
        }
        g.edge_info.push_back(info);
    }
    for (int f = 0; f < mesh.face_count(); ++f) {
        std::set<int> verts;
        double twice_area = 0.0;
        for (const SignedEdge& se : mesh.faces[f].edges) {
            const Edge& e = mesh.edges[se.edge];
            verts.insert(e.tail);
            verts.insert(e.head);
            const Point2& a = mesh.nodes[se.sign > 0 ? e.tail : e.head];
            const Point2& b = mesh.nodes[se.sign > 0 ? e.head : e.tail];
            twice_area += a.x * b.y - b.x * a.y;
        }
        require(twice_area > 0.0, ErrorKind::UnsupportedSpec, "faces must be oriented counter-clockwise");
        int imin = g.n, jmin = g.m;
        for (int v : verts) {
            imin = std::min(imin, g.node_ij[v][0]);
            jmin = std::min(jmin, g.node_ij[v][1]);
        }
        // the lower triangle contains the bottom-right corner of its cell
        const bool lower = verts.count(g.node(imin + 1, jmin)) > 0;
        GridFace info{!lower, imin, jmin};
        (lower ? g.low_ : g.up_)[{imin, jmin}] = f;
        g.face_info.push_back(info);
    }
    return g;
}

// ---------------------------------------------------------------------------------------------
// Boundary causality

// Entities are zero-based mesh indices. 2D q-segments list boundary edges and p-segments list
// boundary nodes; in 1D both segment families list boundary nodes.
struct CausalitySpec {
    std::vector<std::vector<int>> q_segments;
    std::vector<std::vector<int>> p_segments;
};

struct BoundaryPartition {
    std::vector<std::vector<int>> q_segments; // sorted entity lists
    std::vector<std::vector<int>> p_segments;
    std::vector<std::vector<int>> p_segment_edges; // 2D boundary edges not in any q-segment, per p-segment

    int q_input_count() const {
        int c = 0;
        for (const auto& s : q_segments) c += static_cast<int>(s.size());
        return c;
    }
    int p_input_count() const {
        int c = 0;
        for (const auto& s : p_segments) c += static_cast<int>(s.size());
        return c;
    }
    std::vector<int> q_inputs() const {
        std::vector<int> all;
        for (const auto& s : q_segments) all.insert(all.end(), s.begin(), s.end());
        return all;
    }
    std::vector<int> p_inputs() const {
        std::vector<int> all;
        for (const auto& s : p_segments) all.insert(all.end(), s.begin(), s.end());
        return all;
    }
};

inline BoundaryPartition partition_boundary(const SimplexMesh& mesh, const CausalitySpec& spec) {
    const BoundaryInfo info = boundary_info(mesh);
    const std::set<int> boundary_nodes(info.nodes.begin(), info.nodes.end());
    const std::set<int> boundary_edges(info.edges.begin(), info.edges.end());
    BoundaryPartition part;
    std::set<int> used_q, used_p;
    for (auto seg : spec.q_segments) {
        std::sort(seg.begin(), seg.end());
        for (int id : seg) {
            if (mesh.dim == 2)
                require(boundary_edges.count(id) > 0, ErrorKind::InvalidArgument,
                        "q-segment references non-boundary edge " + std::to_string(id));
            else
                require(boundary_nodes.count(id) > 0, ErrorKind::InvalidArgument,
                        "q-segment references non-boundary node " + std::to_string(id));
            require(used_q.insert(id).second, ErrorKind::InvalidArgument, "overlapping q-segments at " + std::to_string(id));
        }
        part.q_segments.push_back(seg);
    }
    for (auto seg : spec.p_segments) {
        std::sort(seg.begin(), seg.end());
        for (int id : seg) {
            require(boundary_nodes.count(id) > 0, ErrorKind::InvalidArgument,
                    "p-segment references non-boundary node " + std::to_string(id));
            require(used_p.insert(id).second, ErrorKind::InvalidArgument, "overlapping p-segments at " + std::to_string(id));
            if (mesh.dim == 1)
                require(used_q.count(id) == 0, ErrorKind::InvalidArgument, "boundary point assigned both causalities");
        }
        part.p_segments.push_back(seg);
    }
    if (mesh.dim == 1) {
        for (int v : info.nodes)
            require(used_q.count(v) + used_p.count(v) == 1, ErrorKind::InvalidArgument,
                    "every boundary point needs exactly one causality");
        return part;
    }
    part.p_segment_edges.assign(part.p_segments.size(), {});
    for (int e : info.edges) {
        if (used_q.count(e)) continue;
        int owner = -1;
        for (std::size_t s = 0; s < part.p_segments.size() && owner < 0; ++s) {
            const auto& seg = part.p_segments[s];
            if (std::binary_search(seg.begin(), seg.end(), mesh.edges[e].tail) ||
                std::binary_search(seg.begin(), seg.end(), mesh.edges[e].head))
                owner = static_cast<int>(s);
        }
        require(owner >= 0, ErrorKind::InvalidArgument,
                "boundary edge " + std::to_string(e) + " is neither a q-input nor adjacent to a p-input node");
        part.p_segment_edges[owner].push_back(e);
    }
    return part;
}

// Boundary edges of a rectangular grid on a named side: bottom, right, top, left or all.
inline std::vector<int> side_edges(const SimplexMesh& mesh, const std::string& side) {
    const GridView g = classify_grid(mesh);
    std::vector<int> out;
    auto add_bottom = [&] { for (int i = 0; i < g.n; ++i) out.push_back(g.horizontal(i, 0)); };
    auto add_top = [&] { for (int i = 0; i < g.n; ++i) out.push_back(g.horizontal(i, g.m)); };
    auto add_left = [&] { for (int j = 0; j < g.m; ++j) out.push_back(g.vertical(0, j)); };
    auto add_right = [&] { for (int j = 0; j < g.m; ++j) out.push_back(g.vertical(g.n, j)); };
    if (side == "bottom") add_bottom();
    else if (side == "top") add_top();
    else if (side == "left") add_left();
    else if (side == "right") add_right();
    else if (side == "all") {
        add_bottom();
        add_right();
        add_top();
        add_left();
    } else
        throw Error(ErrorKind::InvalidArgument, "unknown side '" + side + "'");
    std::sort(out.begin(), out.end());
    return out;
}

// Corner node of a rectangular grid (bottom-left, bottom-right, top-left, top-right) or 1D end (left, right).
inline int corner_node(const SimplexMesh& mesh, const std::string& corner) {
    if (mesh.dim == 1) {
        if (corner == "left") return 0;
        if (corner == "right") return mesh.node_count() - 1;
        throw Error(ErrorKind::InvalidArgument, "unknown interval end '" + corner + "'");
    }
    const GridView g = classify_grid(mesh);
    if (corner == "bottom-left") return g.node(0, 0);
    if (corner == "bottom-right") return g.node(g.n, 0);
    if (corner == "top-left") return g.node(0, g.m);
    if (corner == "top-right") return g.node(g.n, g.m);
    throw Error(ErrorKind::InvalidArgument, "unknown corner '" + corner + "'");
}

} // namespace phfem
