#pragma once

// JSON run configurations: building models from a config document, writing model directories,
// and simulation input signals.

#include "analysis.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "mesh.hpp"
#include "power_maps.hpp"
#include "sim.hpp"
#include "statespace.hpp"
#include "whitney.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace phfem {

inline Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::ConfigError,
                    origin + ": malformed JSON at byte " + std::to_string(e.byte) + " (" + e.what() + ")");
    }
}

inline Json load_json_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::ConfigError, "cannot open config " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return parse_json(s.str(), path.string());
}

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
T get_req(const Json& j, const char* key) {
    require(j.is_object() && j.contains(key), ErrorKind::ConfigError, std::string("missing config key '") + key + "'");
    return get_or<T>(j, key, T{});
}

} // namespace detail

inline SimplexMesh mesh_from_config(const Json& j) {
    const std::string type = detail::get_or<std::string>(j, "type", "rect");
    if (type == "rect")
        return build_rect_mesh(detail::get_req<int>(j, "n"), detail::get_or<int>(j, "m", detail::get_req<int>(j, "n")),
                               detail::get_or<double>(j, "h", 1.0));
    if (type == "interval")
        return build_interval_mesh(detail::get_req<int>(j, "n"), detail::get_or<double>(j, "length", 1.0));
    throw Error(ErrorKind::ConfigError, "unknown mesh type '" + type + "'");
}

inline TriangleWeights weights_from_config(const Json& j) {
    if (j.is_string()) return TriangleWeights::preset(j.get<std::string>());
    require(j.is_object(), ErrorKind::ConfigError, "weights must be a preset name or an object");
    TriangleWeights w;
    w.alpha_I = detail::get_req<double>(j, "alpha_I");
    w.beta_I = detail::get_req<double>(j, "beta_I");
    w.alpha_II = detail::get_req<double>(j, "alpha_II");
    w.beta_II = detail::get_req<double>(j, "beta_II");
    return w;
}

// A q-segment is {"edges": [...]} or {"side": name, "exclude_edges": [...]}; a p-segment is
// {"nodes": [...]} or {"corner": name}. Sides: bottom, right, top, left, all.
inline CausalitySpec causality_from_config(const SimplexMesh& mesh, const Json& j) {
    CausalitySpec cs;
    for (const Json& seg : detail::get_or<Json>(j, "q_segments", Json::array())) {
        std::vector<int> ids;
        if (seg.contains("edges")) ids = detail::get_req<std::vector<int>>(seg, "edges");
        else if (seg.contains("nodes")) ids = detail::get_req<std::vector<int>>(seg, "nodes");
        else if (seg.contains("side")) ids = side_edges(mesh, detail::get_req<std::string>(seg, "side"));
        else if (seg.contains("corner")) ids = {corner_node(mesh, detail::get_req<std::string>(seg, "corner"))};
        else throw Error(ErrorKind::ConfigError, "q-segment needs 'edges', 'side', 'nodes' or 'corner'");
        const auto excl = detail::get_or<std::vector<int>>(seg, "exclude_edges", {});
        std::erase_if(ids, [&](int e) { return std::find(excl.begin(), excl.end(), e) != excl.end(); });
        cs.q_segments.push_back(ids);
    }
    for (const Json& seg : detail::get_or<Json>(j, "p_segments", Json::array())) {
        if (seg.contains("nodes")) cs.p_segments.push_back(detail::get_req<std::vector<int>>(seg, "nodes"));
        else if (seg.contains("corner")) cs.p_segments.push_back({corner_node(mesh, detail::get_req<std::string>(seg, "corner"))});
        else throw Error(ErrorKind::ConfigError, "p-segment needs 'nodes' or 'corner'");
    }
    return cs;
}

struct BuildArtifacts {
    SimplexMesh mesh;
    BoundaryPartition partition;
    IncidencePair inc;
    MapSet maps;
    PHModel model;
    bool has_galerkin = false;
    GalerkinMatrices galerkin;
    StructureReport structure;
    double power_residual = 0.0;
    double isotropy = 0.0;
    ModelResiduals model_res;
    Json metadata;

    double max_residual() const {
        return std::max({structure.max_residual(), power_residual, isotropy, model_res.max()});
    }
};

// Builds a model from a config document:
//   {"mesh": {...}, "method": "ours"|"golo", "weights": ..., "alpha": a, "alpha_prime": a',
//    "causality": {...}, "hodge": "diagonal"}
inline BuildArtifacts build_from_config(const Json& cfg) {
    require(cfg.is_object(), ErrorKind::ConfigError, "config must be a JSON object");
    BuildArtifacts a;
    a.mesh = mesh_from_config(detail::get_req<Json>(cfg, "mesh"));
    a.inc = incidence(a.mesh);
    const std::string hodge = detail::get_or<std::string>(cfg, "hodge", "diagonal");
    require(hodge == "diagonal", ErrorKind::ConfigError, "only the diagonal Hodge mode is available");
    const std::string method = detail::get_or<std::string>(cfg, "method", "ours");
    a.metadata["method"] = method;
    a.metadata["mesh"] = mesh_summary(a.mesh);
    if (a.mesh.dim == 1) {
        if (cfg.contains("causality")) {
            const CausalitySpec cs = causality_from_config(a.mesh, cfg["causality"]);
            const bool standard = cs.q_segments == std::vector<std::vector<int>>{{0}} &&
                                  cs.p_segments == std::vector<std::vector<int>>{{a.mesh.node_count() - 1}};
            require(standard, ErrorKind::UnsupportedSpec,
                    "1D models take the effort e_q at the left end and e_p at the right end as inputs");
        }
        LineModel lm;
        if (method == "ours") {
            const double alpha = detail::get_or<double>(cfg, "alpha", 0.0);
            lm = build_1d_model(a.mesh.edge_count(), alpha, a.mesh.h * a.mesh.edge_count());
            a.metadata["alpha"] = alpha;
        } else if (method == "golo") {
            const double ap = detail::get_or<double>(cfg, "alpha_prime", 0.0);
            lm = build_comparison_1d_model(a.mesh.edge_count(), ap, a.mesh.h * a.mesh.edge_count());
            a.metadata["alpha_prime"] = ap;
            a.metadata["non_convex"] = lm.non_convex;
        } else {
            throw Error(ErrorKind::ConfigError, "unknown method '" + method + "'");
        }
        a.partition.q_segments = {{0}};
        a.partition.p_segments = {{a.mesh.node_count() - 1}};
        a.maps = lm.maps;
        a.model = lm.model;
        if (method == "ours") {
            a.galerkin = assemble(a.mesh, a.partition, FormDegreeSpec::line());
            a.has_galerkin = true;
            a.structure = verify_structure(a.mesh, a.galerkin, a.inc, FormDegreeSpec::line());
        }
    } else {
        require(method == "ours", ErrorKind::ConfigError, "the comparison method is one-dimensional");
        const TriangleWeights w = weights_from_config(detail::get_or<Json>(cfg, "weights", Json("set1")));
        a.metadata["weights"] = {{"alpha_I", w.alpha_I}, {"beta_I", w.beta_I}, {"gamma_I", w.gamma_I()},
                                 {"alpha_II", w.alpha_II}, {"beta_II", w.beta_II}, {"gamma_II", w.gamma_II()}};
        a.metadata["reasonable_weights"] = w.reasonable();
        Json causality = detail::get_or<Json>(cfg, "causality", Json{{"q_segments", {{{"side", "all"}}}}});
        a.partition = partition_boundary(a.mesh, causality_from_config(a.mesh, causality));
        const PlanarModel pm = build_planar_model(a.mesh, a.partition, w);
        a.maps = pm.maps;
        a.model = pm.model;
        a.galerkin = assemble(a.mesh, a.partition, FormDegreeSpec::planar());
        a.has_galerkin = true;
        a.structure = verify_structure(a.mesh, a.galerkin, a.inc, FormDegreeSpec::planar());
    }
    a.power_residual = power_preservation_residual(a.maps, a.inc);
    a.isotropy = isotropy_residual(image_rep(a.maps, a.inc, 1e-10));
    a.model_res = model_residuals(a.model);
    return a;
}

inline Json structure_report_json(const BuildArtifacts& a) {
    Json j;
    j["factorization_p"] = a.structure.factorization_p;
    j["factorization_q"] = a.structure.factorization_q;
    j["lemma"] = a.structure.lemma;
    j["transpose"] = a.structure.transpose;
    j["segment_sum"] = a.structure.segment_sum;
    j["complex_violation"] = a.structure.complex_violation;
    Json ranks = Json::array();
    for (const RankCheck& r : a.structure.ranks)
        ranks.push_back({{"matrix", r.matrix}, {"expected", r.expected}, {"actual", r.actual}, {"pass", r.pass()}});
    j["ranks"] = ranks;
    j["ranks_checked"] = a.structure.ranks_checked;
    j["power_preservation"] = a.power_residual;
    j["isotropy"] = a.isotropy;
    j["J_skew"] = a.model_res.J_skew;
    j["C_minus_BT"] = a.model_res.C_BT;
    j["D_skew"] = a.model_res.D_skew;
    return j;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

inline std::string text_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Writes all matrices, node coordinates, the structure report and the manifest.
inline void write_build(const std::filesystem::path& dir, const BuildArtifacts& a, const Json& cfg) {
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::string, std::string>> files;
    auto add = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        files.emplace_back(name, text);
    };
    add("J.mtx", matrix_market(a.model.J));
    add("B.mtx", matrix_market(a.model.B));
    add("C.mtx", matrix_market(a.model.C));
    add("D.mtx", matrix_market(a.model.D));
    add("Q.mtx", matrix_market(diagonal_matrix(a.model.Q)));
    add("d_p.mtx", matrix_market(a.inc.d_p));
    add("d_q.mtx", matrix_market(a.inc.d_q));
    add("T_q.mtx", matrix_market(a.maps.sel.T_q));
    add("T_p_hat.mtx", matrix_market(a.maps.sel.T_p_hat));
    add("P_eq.mtx", matrix_market(a.maps.sel.P_eq));
    add("P_ep.mtx", matrix_market(a.maps.sel.P_ep));
    add("P_fp.mtx", matrix_market(a.maps.P_fp));
    add("P_fq.mtx", matrix_market(a.maps.P_fq));
    add("P_fq_perp.mtx", matrix_market(a.maps.P_fq_perp));
    add("P_fq_par.mtx", matrix_market(a.maps.P_fq_par));
    add("P_fq_rot.mtx", matrix_market(a.maps.P_fq_rot));
    add("S_p.mtx", matrix_market(a.maps.S_p));
    add("S_q_hat.mtx", matrix_market(a.maps.S_q_hat));
    if (a.has_galerkin) {
        add("M_p.mtx", matrix_market(a.galerkin.M_p));
        add("M_q.mtx", matrix_market(a.galerkin.M_q));
        add("K_p.mtx", matrix_market(a.galerkin.K_p));
        add("K_q.mtx", matrix_market(a.galerkin.K_q));
        add("L_p.mtx", matrix_market(a.galerkin.L_p));
        add("L_q.mtx", matrix_market(a.galerkin.L_q));
    }
    std::ostringstream nodes;
    nodes << "node,x,y\n";
    for (int v = 0; v < a.mesh.node_count(); ++v)
        nodes << v << "," << format_double(a.mesh.nodes[v].x) << "," << format_double(a.mesh.nodes[v].y) << "\n";
    add("nodes.csv", nodes.str());
    std::ostringstream hq;
    hq << "state,label,Q\n";
    for (Eigen::Index i = 0; i < a.model.Q.size(); ++i)
        hq << i << "," << (a.model.labels.states.empty() ? "" : a.model.labels.states[i]) << ","
           << format_double(a.model.Q(i)) << "\n";
    add("hodge.csv", hq.str());
    add("structure.json", structure_report_json(a).dump(2) + "\n");

    Json manifest;
    manifest["command"] = "build";
    manifest["tool_version"] = kToolVersion;
    manifest["created"] = utc_timestamp();
    manifest["config"] = cfg;
    manifest["metadata"] = a.metadata;
    manifest["dims"] = model_dims(a.model);
    manifest["labels"] = model_labels(a.model);
    manifest["p_effort_nodes"] = a.maps.sel.p_efforts;
    manifest["p_input_nodes"] = a.maps.sel.p_inputs;
    manifest["mesh_dim"] = a.mesh.dim;
    Json hashes;
    for (const auto& [name, text] : files) hashes[name] = text_hash(text);
    manifest["artifacts"] = hashes;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------------------------
// Simulation configs

// Signal forms: {"type": "constant", "value": v}, {"type": "sin2_pulse", "amplitude": a, "duration": T}
// (a sin^2(pi t / T) on [0, T), zero afterwards) and {"type": "sine", "amplitude": a, "frequency": f}.
inline std::function<double(double)> signal_from_config(const Json& j) {
    const std::string type = detail::get_req<std::string>(j, "type");
    if (type == "constant") {
        const double v = detail::get_req<double>(j, "value");
        return [v](double) { return v; };
    }
    if (type == "sin2_pulse") {
        const double amp = detail::get_or<double>(j, "amplitude", 1.0);
        const double dur = detail::get_req<double>(j, "duration");
        require(dur > 0.0, ErrorKind::ConfigError, "pulse duration must be positive");
        return [amp, dur](double t) { return amp * corner_pulse(t, dur); };
    }
    if (type == "sine") {
        const double amp = detail::get_or<double>(j, "amplitude", 1.0);
        const double f = detail::get_req<double>(j, "frequency");
        return [amp, f](double t) { return amp * std::sin(2.0 * std::numbers::pi * f * t); };
    }
    throw Error(ErrorKind::ConfigError, "unknown signal type '" + type + "'");
}

struct SimulationSetup {
    SimConfig sim;
    Vec x0;
};

// {"dt": .., "t_end": .., "inputs": [{"port": index or label, "signal": {...}}],
//  "initial_state": "zero" | {"random_seed": s} | [values], "snapshots": [times]}
inline SimulationSetup simulation_from_config(const PHModel& model, const Json& cfg) {
    require(cfg.is_object(), ErrorKind::ConfigError, "simulation config must be a JSON object");
    SimulationSetup s;
    s.sim.dt = detail::get_req<double>(cfg, "dt");
    s.sim.t_end = detail::get_req<double>(cfg, "t_end");
    s.sim.snapshot_times = detail::get_or<std::vector<double>>(cfg, "snapshots", {});
    std::vector<std::pair<int, std::function<double(double)>>> ports;
    for (const Json& in : detail::get_or<Json>(cfg, "inputs", Json::array())) {
        int port = -1;
        const Json& p = in.at("port");
        if (p.is_number_integer()) port = p.get<int>();
        else {
            const auto& labels = model.labels.inputs;
            auto it = std::find(labels.begin(), labels.end(), p.get<std::string>());
            require(it != labels.end(), ErrorKind::ConfigError, "unknown input port " + p.dump());
            port = static_cast<int>(it - labels.begin());
        }
        require(port >= 0 && port < model.input_dim(), ErrorKind::ConfigError, "input port out of range");
        ports.emplace_back(port, signal_from_config(in.at("signal")));
    }
    const Eigen::Index nu = model.input_dim();
    if (!ports.empty())
        s.sim.input = [ports, nu](double t) {
            Vec u = Vec::Zero(nu);
            for (const auto& [k, f] : ports) u(k) += f(t);
            return u;
        };
    const Json init = detail::get_or<Json>(cfg, "initial_state", Json("zero"));
    const Eigen::Index n = model.state_dim();
    if (init.is_string()) {
        require(init.get<std::string>() == "zero", ErrorKind::ConfigError, "initial_state must be 'zero'");
        s.x0 = Vec::Zero(n);
    } else if (init.is_array()) {
        const auto v = init.get<std::vector<double>>();
        require(static_cast<Eigen::Index>(v.size()) == n, ErrorKind::ConfigError, "initial state has the wrong size");
        s.x0 = Eigen::Map<const Vec>(v.data(), n);
    } else {
        std::mt19937_64 rng(detail::get_req<std::uint64_t>(init, "random_seed"));
        std::normal_distribution<double> normal;
        s.x0.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) s.x0(i) = normal(rng);
    }
    return s;
}

} // namespace phfem
