// Command-line front end: build models from JSON configs, simulate them, compute spectra and
// reproduce the eigenvalue tables and the planar wave experiment.

#include "phfem/phfem.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace phfem;

namespace {

void write_or_print(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") std::cout << text;
    else {
        if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
        write_text(out, text);
    }
}

int run_build(const std::string& config_path, const std::string& out) {
    require(!out.empty(), ErrorKind::ConfigError, "--out is required");
    const Json cfg = load_json_file(config_path);
    const BuildArtifacts a = build_from_config(cfg);
    write_build(out, a, cfg);
    const Json report = structure_report_json(a);
    bool ranks_ok = true;
    for (const RankCheck& r : a.structure.ranks) ranks_ok = ranks_ok && r.pass();
    const bool ok = a.max_residual() <= 1e-10 && a.structure.complex_violation == 0 && ranks_ok;
    if (!ok) {
        std::cerr << "structural check failed:\n" << report.dump(2) << "\n";
        return 1;
    }
    std::cout << "built " << out << ": " << a.model.state_dim() << " states, " << a.model.input_dim()
              << " inputs, max residual " << a.max_residual() << "\n";
    return 0;
}

struct NodeTable {
    std::vector<double> x, y;
};

NodeTable read_nodes(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);
    NodeTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, xs, ys;
        std::getline(row, id, ',');
        std::getline(row, xs, ',');
        std::getline(row, ys, ',');
        t.x.push_back(std::stod(xs));
        t.y.push_back(std::stod(ys));
    }
    return t;
}

int run_simulate(const std::string& model_dir, const std::string& config_path, const std::string& out) {
    require(!out.empty(), ErrorKind::ConfigError, "--out is required");
    const PHModel model = read_model(model_dir);
    const Json manifest = fs::exists(fs::path(model_dir) / "manifest.json")
                              ? parse_json(read_text(fs::path(model_dir) / "manifest.json"), "manifest.json")
                              : Json::object();
    const Json cfg = load_json_file(config_path);
    const SimulationSetup setup = simulation_from_config(model, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory tr = simulate(model, setup.sim, setup.x0);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(out);

    std::ostringstream energy;
    energy << "t,H,supplied,defect\n";
    for (std::size_t n = 0; n < tr.times.size(); ++n)
        energy << format_double(tr.times[n]) << "," << format_double(tr.energy[n]) << ","
               << format_double(tr.supplied[n]) << "," << format_double(tr.balance_defect(n)) << "\n";
    write_text(fs::path(out) / "energy.csv", energy.str());

    std::ostringstream outputs;
    outputs << "t";
    for (Eigen::Index k = 0; k < model.output_dim(); ++k)
        outputs << "," << (model.labels.outputs.empty() ? "y" + std::to_string(k) : model.labels.outputs[k]);
    outputs << "\n";
    for (std::size_t n = 0; n < tr.times.size(); ++n) {
        outputs << format_double(tr.times[n]);
        for (Eigen::Index k = 0; k < model.output_dim(); ++k) outputs << "," << format_double(tr.outputs(n, k));
        outputs << "\n";
    }
    write_text(fs::path(out) / "outputs.csv", outputs.str());

    const bool planar = manifest.value("mesh_dim", 0) == 2 && fs::exists(fs::path(model_dir) / "nodes.csv");
    Json index = Json::array();
    for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
        const std::string name = "snapshot_" + std::to_string(s) + ".csv";
        std::ostringstream snap;
        const Vec& x = tr.snapshots[s];
        if (planar) {
            const NodeTable nodes = read_nodes(fs::path(model_dir) / "nodes.csv");
            const auto effort_nodes = manifest.at("p_effort_nodes").get<std::vector<int>>();
            const auto input_nodes = manifest.at("p_input_nodes").get<std::vector<int>>();
            std::vector<double> field(nodes.x.size(), 0.0);
            for (std::size_t r = 0; r < effort_nodes.size(); ++r) field[effort_nodes[r]] = model.Q(r) * x(r);
            const Vec u = setup.sim.input ? setup.sim.input(tr.snapshot_times[s]) : Vec::Zero(model.input_dim());
            for (std::size_t r = 0; r < input_nodes.size(); ++r) field[input_nodes[r]] = u(r);
            snap << "x,y,value\n";
            for (std::size_t v = 0; v < field.size(); ++v)
                snap << format_double(nodes.x[v]) << "," << format_double(nodes.y[v]) << "," << format_double(field[v]) << "\n";
        } else {
            snap << "state,label,value\n";
            for (Eigen::Index i = 0; i < x.size(); ++i)
                snap << i << "," << (model.labels.states.empty() ? "" : model.labels.states[i]) << ","
                     << format_double(x(i)) << "\n";
        }
        write_text(fs::path(out) / name, snap.str());
        index.push_back({{"t", tr.snapshot_times[s]}, {"file", name}, {"kind", planar ? "nodal_effort" : "state"}});
    }
    write_text(fs::path(out) / "snapshots.json", index.dump(2) + "\n");

    Json m;
    m["command"] = "simulate";
    m["tool_version"] = kToolVersion;
    m["created"] = utc_timestamp();
    m["model"] = fs::absolute(model_dir).string();
    m["config"] = cfg;
    m["integrator"] = "implicit midpoint, inputs sampled at interval midpoints";
    m["steps"] = tr.times.size() - 1;
    m["seconds"] = seconds;
    m["final_energy"] = tr.energy.back();
    m["initial_energy"] = tr.energy.front();
    m["max_balance_defect"] = tr.max_balance_defect();
    write_text(fs::path(out) / "manifest.json", m.dump(2) + "\n");
    std::cout << "simulated " << tr.times.size() - 1 << " steps; H(0) = " << tr.energy.front()
              << ", H(T) = " << tr.energy.back() << "\n";
    return 0;
}

int run_eigs(const std::string& model_dir, const std::string& method, int n, double alpha, double alpha_prime,
             const std::string& out) {
    PHModel model;
    if (!model_dir.empty()) model = read_model(model_dir);
    else if (method == "ours") model = build_1d_model(n, alpha).model;
    else if (method == "golo") model = build_comparison_1d_model(n, alpha_prime).model;
    else throw Error(ErrorKind::ConfigError, "unknown method '" + method + "'");
    const Spectrum sp = spectrum(model);
    std::ostringstream csv;
    csv.precision(12);
    csv << "k,imag,exact,rel_error\n";
    for (std::size_t k = 0; k < sp.imag.size(); ++k) {
        const double ex = exact_eigenvalue(static_cast<int>(k) + 1);
        csv << k + 1 << "," << sp.imag[k] << "," << ex << "," << std::abs(sp.imag[k] - ex) / ex << "\n";
    }
    write_or_print(out, csv.str());
    return 0;
}

int run_wave2d(int n, int m, const std::string& preset, double dt, double t_end, const std::string& out) {
    require(!out.empty(), ErrorKind::ConfigError, "--out is required");
    require(m == n, ErrorKind::InvalidArgument, "the wave experiment uses a square grid (--m must equal --n)");
    Wave2DConfig cfg;
    cfg.n = n;
    cfg.preset = preset;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.snapshot_times = {0.0};
    for (double t = 2.0; t < t_end - 1e-9; t += 2.0) cfg.snapshot_times.push_back(t);
    cfg.snapshot_times.push_back(t_end);
    const auto t0 = std::chrono::steady_clock::now();
    const Wave2DResult r = wave2d_experiment(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(out);
    Json index = Json::array();
    for (std::size_t s = 0; s < r.snapshots.size(); ++s) {
        std::ostringstream snap;
        snap << "x,y,value\n";
        for (std::size_t v = 0; v < r.snapshots[s].values.size(); ++v)
            snap << format_double(r.snapshots[s].points[v].x) << "," << format_double(r.snapshots[s].points[v].y) << ","
                 << format_double(r.snapshots[s].values[v]) << "\n";
        const std::string name = "snapshot_" + std::to_string(s) + ".csv";
        write_text(fs::path(out) / name, snap.str());
        index.push_back({{"t", r.trajectory.snapshot_times[s]}, {"file", name}, {"kind", "nodal_effort"}});
    }
    write_text(fs::path(out) / "snapshots.json", index.dump(2) + "\n");
    std::ostringstream energy;
    energy << "t,H,supplied,defect\n";
    for (std::size_t k = 0; k < r.trajectory.times.size(); ++k)
        energy << format_double(r.trajectory.times[k]) << "," << format_double(r.trajectory.energy[k]) << ","
               << format_double(r.trajectory.supplied[k]) << "," << format_double(r.trajectory.balance_defect(k)) << "\n";
    write_text(fs::path(out) / "energy.csv", energy.str());
    Json m_;
    m_["command"] = "wave2d";
    m_["tool_version"] = kToolVersion;
    m_["created"] = utc_timestamp();
    m_["domain"] = {0.0, cfg.side};
    m_["n"] = n;
    m_["h"] = cfg.side / n;
    m_["preset"] = preset;
    m_["dt"] = dt;
    m_["t_end"] = t_end;
    m_["integrator"] = "implicit midpoint";
    m_["input"] = "corner node (0,0): sin^2(pi t / 8) for t < 8, zero afterwards; boundary edges q-causal with zero effort";
    m_["front_radius"] = r.front_radius;
    m_["front_value"] = r.front_value;
    m_["reference_radius"] = r.reference_radius;
    m_["energy_drift_after_pulse"] = r.energy_after_pulse_drift;
    m_["seconds"] = seconds;
    write_text(fs::path(out) / "manifest.json", m_.dump(2) + "\n");
    std::cout << "wave front at r = " << r.front_radius << " (reference " << r.reference_radius << "), "
              << seconds << " s\n";
    return 0;
}

int run_convergence(const std::string& method, const std::vector<double>& params, const std::vector<int>& sizes,
                    const std::vector<int>& modes, const std::string& out) {
    const ConvergenceStudy st =
        convergence_study(method == "golo" ? Method::Comparison : Method::Upwind, params, sizes, modes);
    std::ostringstream csv;
    csv.precision(12);
    csv << "parameter,N,k,value,rel_error\n";
    for (const auto& r : st.rows) csv << r.parameter << "," << r.n << "," << r.k << "," << r.value << "," << r.rel_error << "\n";
    csv << "\nparameter,k,slope\n";
    for (const auto& s : st.slopes) csv << s.parameter << "," << s.k << "," << s.slope << "\n";
    write_or_print(out, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving mixed-Galerkin port-Hamiltonian models"};
    app.require_subcommand(1);
    std::string config, out, model_dir, method = "ours", preset = "set4";
    double alpha = 0.0, alpha_prime = 0.0, dt = 0.05, t_end = 18.0;
    int n = 20, m = -1;
    std::vector<double> alphas{0.0, 0.5};
    std::vector<int> sizes{20, 40, 80, 160}, modes{1};

    auto* build = app.add_subcommand("build", "assemble a model directory from a JSON config");
    build->add_option("--config", config, "model config (JSON)")->required();
    build->add_option("--out", out, "output directory")->required();

    auto* sim = app.add_subcommand("simulate", "time-integrate a model directory");
    sim->add_option("--model", model_dir, "model directory written by build")->required();
    sim->add_option("--config", config, "simulation config (JSON)")->required();
    sim->add_option("--out", out, "output directory")->required();

    auto* eigs = app.add_subcommand("eigs", "spectrum of a 1D model or of a model directory");
    eigs->add_option("--model", model_dir, "model directory (overrides the 1D parameters)");
    eigs->add_option("--n", n, "number of elements");
    eigs->add_option("--alpha", alpha, "flow-map upwind parameter");
    eigs->add_option("--alpha-prime", alpha_prime, "effort-map parameter of the comparison method");
    eigs->add_option("--method", method, "ours or golo")->check(CLI::IsMember({"ours", "golo"}));
    eigs->add_option("--out", out, "CSV file (default stdout)");

    auto* t3 = app.add_subcommand("table3", "eigenvalue table of the upwind flow-map method");
    t3->add_option("--out", out, "CSV file (default stdout)");
    auto* t4 = app.add_subcommand("table4", "eigenvalue table of the effort-map comparison method");
    t4->add_option("--out", out, "CSV file (default stdout)");

    auto* wave = app.add_subcommand("wave2d", "planar wave driven from a corner of (0,20)^2");
    wave->add_option("--n", n, "cells per side")->default_val(40);
    wave->add_option("--m", m, "cells in y (must equal --n)");
    wave->add_option("--preset", preset, "weight preset set1..set4")->default_val("set4");
    wave->add_option("--dt", dt, "time step")->default_val(0.05);
    wave->add_option("--t-end", t_end, "horizon")->default_val(18.0);
    wave->add_option("--out", out, "output directory")->required();

    auto* conv = app.add_subcommand("convergence", "relative eigenvalue errors and log-log slopes");
    conv->add_option("--alpha", alphas, "parameters");
    conv->add_option("--n", sizes, "element counts");
    conv->add_option("--k", modes, "mode indices");
    conv->add_option("--method", method, "ours or golo")->check(CLI::IsMember({"ours", "golo"}));
    conv->add_option("--out", out, "CSV file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*build) return run_build(config, out);
        if (*sim) return run_simulate(model_dir, config, out);
        if (*eigs) return run_eigs(model_dir, method, n, alpha, alpha_prime, out);
        if (*t3) {
            write_or_print(out, table3().csv());
            return 0;
        }
        if (*t4) {
            write_or_print(out, table4().csv());
            return 0;
        }
        if (*wave) return run_wave2d(n, m < 0 ? n : m, preset, dt, t_end, out);
        if (*conv) return run_convergence(method, alphas, sizes, modes, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const Json::exception& e) {
        std::cerr << "error: config-error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
