#pragma once

// Implicit-midpoint time integration of port-Hamiltonian models with energy accounting, and the
// planar wave experiment driven from a domain corner.

#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "power_maps.hpp"
#include "statespace.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace phfem {

// Factorizes (I - dt/2 A) once and advances x by one implicit-midpoint step per call.
class MidpointStepper {
public:
    MidpointStepper(const PHModel& model, double dt) : dt_(dt), B_(model.B) {
        require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "time step must be positive");
        const SpMat A = model.system_matrix();
        const SpMat I = identity(A.rows());
        lhs_ = SpMat(I - 0.5 * dt * A);
        rhs_ = SpMat(I + 0.5 * dt * A);
        lu_.analyzePattern(lhs_);
        lu_.factorize(lhs_);
        require(lu_.info() == Eigen::Success, ErrorKind::NumericalFailure, "midpoint system matrix is singular");
    }

    Vec step(const Vec& x, const Vec& u_mid) const {
        Vec rhs = rhs_ * x;
        if (u_mid.size() > 0) rhs += dt_ * (B_ * u_mid);
        Vec next = lu_.solve(rhs);
        require(lu_.info() == Eigen::Success, ErrorKind::NumericalFailure, "midpoint solve failed");
        return next;
    }

    double dt() const { return dt_; }

private:
    double dt_;
    SpMat B_;
    SpMat lhs_;
    SpMat rhs_;
    mutable Eigen::SparseLU<SpMat> lu_;
};

inline Vec step_midpoint(const PHModel& model, const Vec& x, const Vec& u_mid, double dt) {
    return MidpointStepper(model, dt).step(x, u_mid);
}

using InputSignal = std::function<Vec(double)>;

struct SimConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    InputSignal input;                 // empty means zero input
    std::vector<double> snapshot_times; // must lie on the time grid
    bool keep_states = false;
};

struct Trajectory {
    std::vector<double> times;
    Mat outputs;                 // one row per time, outputs sampled at grid times
    std::vector<double> energy;  // H_d(x_n)
    std::vector<double> supplied; // trapezoidal integral of y^T u up to t_n
    std::vector<Vec> states;      // all states if requested
    std::vector<double> snapshot_times;
    std::vector<Vec> snapshots;
    Vec final_state;

    double balance_defect(std::size_t n) const { return std::abs(energy[n] - energy[0] - supplied[n]); }
    double max_balance_defect() const {
        double d = 0.0;
        for (std::size_t n = 0; n < energy.size(); ++n) d = std::max(d, balance_defect(n));
        return d;
    }
};

// Runs the implicit midpoint rule with inputs sampled at interval midpoints. Outputs are evaluated
// at grid times and the supplied energy integrates y^T u with the trapezoidal rule, so that
// H(t_n) - H(0) - supplied(t_n) is a second-order defect.
inline Trajectory simulate(const PHModel& model, const SimConfig& cfg, const Vec& x0) {
    require(cfg.dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
    require(cfg.t_end >= 0.0, ErrorKind::InvalidArgument, "horizon must be non-negative");
    require(x0.size() == model.state_dim(), ErrorKind::InvalidArgument, "initial state has the wrong dimension");
    const double ratio = cfg.t_end / cfg.dt;
    const long steps = std::lround(ratio);
    require(std::abs(ratio - static_cast<double>(steps)) < 1e-6, ErrorKind::InvalidArgument,
            "horizon must be an integer multiple of the time step");
    const Eigen::Index nu = model.input_dim();
    auto input_at = [&](double t) {
        if (!cfg.input) return Vec(Vec::Zero(nu));
        Vec u = cfg.input(t);
        require(u.size() == nu, ErrorKind::InvalidArgument, "input signal has the wrong dimension");
        return u;
    };
    std::vector<long> snapshot_steps;
    for (double ts : cfg.snapshot_times) {
        require(ts >= 0.0 && ts <= cfg.t_end + 1e-12, ErrorKind::InvalidArgument, "snapshot time outside the horizon");
        const long k = std::lround(ts / cfg.dt);
        require(std::abs(ts / cfg.dt - static_cast<double>(k)) < 1e-6, ErrorKind::InvalidArgument,
                "snapshot time must lie on the time grid");
        snapshot_steps.push_back(k);
    }
    const MidpointStepper stepper(model, cfg.dt);
    Trajectory tr;
    tr.outputs.resize(steps + 1, model.output_dim());
    Vec x = x0;
    Vec u = input_at(0.0);
    Vec y = model.output(x, u);
    auto record = [&](long n, double t) {
        tr.times.push_back(t);
        tr.outputs.row(n) = y.transpose();
        tr.energy.push_back(model.hamiltonian(x));
        if (cfg.keep_states) tr.states.push_back(x);
        for (std::size_t s = 0; s < snapshot_steps.size(); ++s)
            if (snapshot_steps[s] == n) {
                tr.snapshot_times.push_back(cfg.snapshot_times[s]);
                tr.snapshots.push_back(x);
            }
    };
    tr.supplied.push_back(0.0);
    record(0, 0.0);
    for (long n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        const double t_next = static_cast<double>(n + 1) * cfg.dt;
        x = stepper.step(x, input_at(t + 0.5 * cfg.dt));
        if (!x.allFinite())
            throw Error(ErrorKind::NumericalFailure, "non-finite state at step " + std::to_string(n + 1) +
                                                         " (t = " + std::to_string(t_next) + ")");
        const Vec u_next = input_at(t_next);
        const Vec y_next = model.output(x, u_next);
        tr.supplied.push_back(tr.supplied.back() + 0.5 * cfg.dt * (y.dot(u) + y_next.dot(u_next)));
        u = u_next;
        y = y_next;
        record(n + 1, t_next);
    }
    tr.final_state = x;
    return tr;
}

// ---------------------------------------------------------------------------------------------
// Planar wave experiment

struct Wave2DConfig {
    int n = 40;                  // cells per side
    double side = 20.0;          // domain (0, side)^2
    std::string preset = "set4";
    double dt = 0.05;
    double t_end = 18.0;
    double pulse_end = 8.0;      // corner effort sin^2(pi t / pulse_end) for t < pulse_end
    std::vector<double> snapshot_times{0.0, 18.0};
};

struct NodalField {
    std::vector<Point2> points;
    std::vector<double> values;
};

struct Wave2DResult {
    PlanarModel pm;
    Trajectory trajectory;
    std::vector<NodalField> snapshots; // one per snapshot time
    double front_radius = 0.0;   // distance from the corner of the largest diagonal effort at t_end
    double front_value = 0.0;
    double reference_radius = 14.0;
    double energy_after_pulse_drift = 0.0; // max relative per-step change of H for t >= pulse_end
};

inline double corner_pulse(double t, double pulse_end) {
    if (t < 0.0 || t >= pulse_end) return 0.0;
    const double s = std::sin(std::numbers::pi * t / pulse_end);
    return s * s;
}

// Nodal co-state field: reduced efforts Q_p x_p on state nodes, the imposed effort on input nodes.
inline NodalField nodal_effort_field(const PlanarModel& pm, const Vec& x, const Vec& u) {
    NodalField f;
    f.points = pm.mesh.nodes;
    f.values.assign(pm.mesh.node_count(), 0.0);
    for (std::size_t r = 0; r < pm.maps.sel.p_efforts.size(); ++r)
        f.values[pm.maps.sel.p_efforts[r]] = pm.model.Q(r) * x(r);
    for (std::size_t r = 0; r < pm.maps.sel.p_inputs.size(); ++r) f.values[pm.maps.sel.p_inputs[r]] = u(r);
    return f;
}

inline Wave2DResult wave2d_experiment(const Wave2DConfig& cfg) {
    require(cfg.n >= 1, ErrorKind::InvalidArgument, "need at least one cell per side");
    const TriangleWeights w = TriangleWeights::preset(cfg.preset);
    const SimplexMesh mesh = build_rect_mesh(cfg.n, cfg.n, cfg.side / cfg.n);
    const int corner = corner_node(mesh, "bottom-left");
    CausalitySpec cs;
    std::vector<int> q_edges;
    for (int e : side_edges(mesh, "all"))
        if (mesh.edges[e].tail != corner && mesh.edges[e].head != corner) q_edges.push_back(e);
    cs.q_segments = {q_edges};
    cs.p_segments = {{corner}};
    Wave2DResult res;
    res.pm = build_planar_model(mesh, partition_boundary(mesh, cs), w);
    const Eigen::Index nu = res.pm.model.input_dim();
    SimConfig sc;
    sc.dt = cfg.dt;
    sc.t_end = cfg.t_end;
    sc.snapshot_times = cfg.snapshot_times;
    sc.input = [nu, pe = cfg.pulse_end](double t) {
        Vec u = Vec::Zero(nu);
        u(0) = corner_pulse(t, pe); // the single p-input comes first
        return u;
    };
    res.trajectory = simulate(res.pm.model, sc, Vec::Zero(res.pm.model.state_dim()));
    for (std::size_t s = 0; s < res.trajectory.snapshots.size(); ++s)
        res.snapshots.push_back(
            nodal_effort_field(res.pm, res.trajectory.snapshots[s], sc.input(res.trajectory.snapshot_times[s])));
    // wave front along the main diagonal at the final time
    const NodalField field = nodal_effort_field(res.pm, res.trajectory.final_state, sc.input(cfg.t_end));
    const GridView g = classify_grid(mesh);
    res.front_value = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= cfg.n; ++i) {
        const double v = field.values[g.node(i, i)];
        if (v > res.front_value) {
            res.front_value = v;
            res.front_radius = std::sqrt(2.0) * i * mesh.h;
        }
    }
    const auto& H = res.trajectory.energy;
    for (std::size_t k = 1; k < H.size(); ++k)
        if (res.trajectory.times[k - 1] >= cfg.pulse_end - 1e-12 && H[k - 1] > 0.0)
            res.energy_after_pulse_drift = std::max(res.energy_after_pulse_drift, std::abs(H[k] - H[k - 1]) / H[k - 1]);
    return res;
}

} // namespace phfem
