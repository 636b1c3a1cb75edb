#pragma once

// Matrix Market and CSV export, model directories and manifests.

#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "statespace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace phfem {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "phfem 1.0.0";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Coordinate format, entries sorted by (row, column), one-based indices.
template <class Scalar>
std::string matrix_market(const Eigen::SparseMatrix<Scalar>& m) {
    constexpr bool integral = std::is_integral_v<Scalar>;
    std::vector<std::tuple<Eigen::Index, Eigen::Index, Scalar>> entries;
    for (int k = 0; k < m.outerSize(); ++k)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(m, k); it; ++it)
            if (it.value() != Scalar(0)) entries.emplace_back(it.row(), it.col(), it.value());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::ostringstream out;
    out << "%%MatrixMarket matrix coordinate " << (integral ? "integer" : "real") << " general\n";
    out << m.rows() << " " << m.cols() << " " << entries.size() << "\n";
    for (const auto& [r, c, v] : entries) {
        out << r + 1 << " " << c + 1 << " ";
        if constexpr (integral) out << v;
        else out << format_double(v);
        out << "\n";
    }
    return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::ConfigError, "cannot write " + path.string());
    f << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::MissingArtifact, "cannot read " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline SpMat read_matrix_market(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);
    require(line.rfind("%%MatrixMarket matrix coordinate", 0) == 0, ErrorKind::ConfigError,
            path.string() + " is not a coordinate Matrix Market file");
    while (std::getline(in, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream header(line);
    long rows = 0, cols = 0, nnz = 0;
    header >> rows >> cols >> nnz;
    require(static_cast<bool>(header), ErrorKind::ConfigError, "bad Matrix Market size line in " + path.string());
    std::vector<Triplet> t;
    for (long k = 0; k < nnz; ++k) {
        long r = 0, c = 0;
        double v = 0;
        in >> r >> c >> v;
        require(static_cast<bool>(in) && r >= 1 && r <= rows && c >= 1 && c <= cols, ErrorKind::ConfigError,
                "bad Matrix Market entry in " + path.string());
        t.emplace_back(r - 1, c - 1, v);
    }
    return sparse_from(rows, cols, t);
}

inline SpMat diagonal_matrix(const Vec& d) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d(i));
    return sparse_from(d.size(), d.size(), t);
}

// FNV-1a over the mesh entities, used to tie model files to the mesh they came from.
inline std::string mesh_hash(const SimplexMesh& mesh) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    mix(std::to_string(mesh.dim));
    for (const Point2& p : mesh.nodes) mix(format_double(p.x) + "," + format_double(p.y) + ";");
    for (const Edge& e : mesh.edges) mix(std::to_string(e.tail) + ">" + std::to_string(e.head) + ";");
    for (const Face& f : mesh.faces)
        for (const SignedEdge& se : f.edges) mix(std::to_string(se.sign * (se.edge + 1)) + ";");
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline Json mesh_summary(const SimplexMesh& mesh) {
    Json j;
    j["dim"] = mesh.dim;
    j["nodes"] = mesh.node_count();
    j["edges"] = mesh.edge_count();
    j["faces"] = mesh.face_count();
    j["h"] = mesh.h;
    if (mesh.dim == 2) j["grid"] = {mesh.grid_n, mesh.grid_m};
    j["numbering"] = kNumberingVersion;
    j["hash"] = mesh_hash(mesh);
    return j;
}

// Writes J, B, C, D and Q (diagonal) as Matrix Market files.
inline void write_model_matrices(const std::filesystem::path& dir, const PHModel& m) {
    std::filesystem::create_directories(dir);
    write_text(dir / "J.mtx", matrix_market(m.J));
    write_text(dir / "B.mtx", matrix_market(m.B));
    write_text(dir / "C.mtx", matrix_market(m.C));
    write_text(dir / "D.mtx", matrix_market(m.D));
    write_text(dir / "Q.mtx", matrix_market(diagonal_matrix(m.Q)));
}

inline PHModel read_model(const std::filesystem::path& dir) {
    require(std::filesystem::is_directory(dir), ErrorKind::MissingArtifact, "model directory " + dir.string() + " not found");
    PHModel m;
    m.J = read_matrix_market(dir / "J.mtx");
    m.B = read_matrix_market(dir / "B.mtx");
    m.C = read_matrix_market(dir / "C.mtx");
    m.D = read_matrix_market(dir / "D.mtx");
    const SpMat q = read_matrix_market(dir / "Q.mtx");
    m.Q = Vec(q.diagonal());
    const auto manifest_path = dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        const Json j = Json::parse(read_text(manifest_path));
        if (j.contains("labels")) {
            m.labels.states = j["labels"]["states"].get<std::vector<std::string>>();
            m.labels.inputs = j["labels"]["inputs"].get<std::vector<std::string>>();
            m.labels.outputs = j["labels"]["outputs"].get<std::vector<std::string>>();
        }
        if (j.contains("dims")) m.p_states = j["dims"].value("p_states", 0);
    }
    require(m.J.rows() == m.J.cols() && m.J.rows() == m.Q.size() && m.B.rows() == m.J.rows() &&
                m.C.cols() == m.J.cols() && m.D.rows() == m.C.rows() && m.D.cols() == m.B.cols(),
            ErrorKind::ConfigError, "model matrices in " + dir.string() + " have inconsistent sizes");
    return m;
}

inline Json model_dims(const PHModel& m) {
    Json j;
    j["states"] = m.state_dim();
    j["p_states"] = m.p_states;
    j["inputs"] = m.input_dim();
    j["outputs"] = m.output_dim();
    return j;
}

inline Json model_labels(const PHModel& m) {
    Json j;
    j["states"] = m.labels.states;
    j["inputs"] = m.labels.inputs;
    j["outputs"] = m.labels.outputs;
    return j;
}

} // namespace phfem
