#pragma once

// One-dimensional models, spectra of the system matrix, eigenvalue tables and convergence orders.

#include "errors.hpp"
#include "hodge.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "power_maps.hpp"
#include "statespace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace phfem {

// Runs body(i) for i in [0, count) on up to PHFEM_THREADS worker threads (default: hardware concurrency).
template <class Body>
void parallel_for(int count, Body body) {
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("PHFEM_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) threads = std::min(threads, cap);
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------------------------
// 1D models on the unit interval, left end q-causal and right end p-causal

struct LineModel {
    SimplexMesh mesh;
    IncidencePair inc;
    MapSet maps;
    HodgePair hodge;
    PHModel model;
    bool non_convex = false;
};

inline LineModel build_1d_model(int n, double alpha, double length = 1.0) {
    require(n >= 2, ErrorKind::InvalidArgument, "need at least two elements");
    LineModel lm;
    lm.mesh = build_interval_mesh(n, length);
    lm.inc = incidence(lm.mesh);
    lm.hodge = hodge_1d(n, alpha, lm.mesh.h);
    lm.maps = build_1d_maps(lm.mesh, alpha);
    lm.model = assemble_model(io_rep(lm.maps, lm.inc), lm.hodge, default_labels(lm.mesh, lm.maps));
    return lm;
}

// Comparison method: identity flow maps, reduced efforts formed as convex combinations of
// neighbouring node efforts, outputs solved from the power-preservation equation.
inline MapSet build_comparison_1d_maps(const SimplexMesh& mesh, double alpha_prime) {
    require(mesh.dim == 1, ErrorKind::InvalidArgument, "the comparison method is one-dimensional");
    require(alpha_prime > -1.0 && alpha_prime < 1.0, ErrorKind::InvalidArgument, "alpha' must lie in (-1, 1)");
    const int n = mesh.edge_count();
    const int last = n;
    MapSet maps;
    maps.sign_r = 1;
    BoundaryPartition part;
    part.q_segments = {{0}};
    part.p_segments = {{last}};
    maps.sel = build_selectors(mesh, part);
    std::vector<Triplet> pep, peq;
    for (int k = 0; k < n; ++k) {
        pep.emplace_back(k, k, 1.0 - alpha_prime);
        pep.emplace_back(k, k + 1, alpha_prime);
        peq.emplace_back(k, k, alpha_prime);
        peq.emplace_back(k, k + 1, 1.0 - alpha_prime);
    }
    maps.sel.P_ep = sparse_from(n, n + 1, pep);
    maps.sel.P_eq = sparse_from(n, n + 1, peq);
    maps.P_fp = identity(n);
    maps.P_fp_full = maps.P_fp;
    maps.P_fq = identity(n);
    maps.P_fq_perp = maps.P_fq;
    maps.P_fq_par = zeros(n, n);
    maps.P_fq_rot = zeros(n, n);
    // -(d^T P_ep + P_eq^T d) = T_q^T S_p + S_q_hat^T T_p_hat, with T_q = e_first and T_p_hat = -e_last
    const Mat d = Mat(to_real(incidence(mesh).d_q));
    const Mat rest = -(d.transpose() * Mat(maps.sel.P_ep) + Mat(maps.sel.P_eq).transpose() * d);
    Mat sp = rest.row(0);
    sp(0, last) = 0.0;
    const Mat sq = -rest.col(last).transpose();
    maps.S_p = sp.sparseView(1e-300, 1.0);
    maps.S_q_hat = sq.sparseView(1e-300, 1.0);
    return maps;
}

inline LineModel build_comparison_1d_model(int n, double alpha_prime, double length = 1.0) {
    require(n >= 2, ErrorKind::InvalidArgument, "need at least two elements");
    LineModel lm;
    lm.mesh = build_interval_mesh(n, length);
    lm.inc = incidence(lm.mesh);
    lm.maps = build_comparison_1d_maps(lm.mesh, alpha_prime);
    const double res = power_preservation_residual(lm.maps, lm.inc);
    require(res <= 1e-12, ErrorKind::InternalConsistency, "comparison maps violate power preservation");
    lm.hodge.Q_p = Vec::Constant(n, 1.0 / lm.mesh.h);
    lm.hodge.Q_q = Vec::Constant(n, 1.0 / lm.mesh.h);
    lm.model = assemble_model(io_rep(lm.maps, lm.inc), lm.hodge, default_labels(lm.mesh, lm.maps));
    lm.non_convex = alpha_prime < 0.0;
    return lm;
}

// ---------------------------------------------------------------------------------------------
// Spectra

struct Spectrum {
    std::vector<double> imag; // positive imaginary parts, ascending
    double max_real = 0.0;
};

inline Spectrum spectrum(const PHModel& model, double real_tol = 1e-9) {
    const Mat A = Mat(model.system_matrix());
    Eigen::EigenSolver<Mat> es(A, false);
    require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "eigenvalue solver did not converge");
    Spectrum s;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto lam = es.eigenvalues()(i);
        s.max_real = std::max(s.max_real, std::abs(lam.real()));
        if (lam.imag() > 1e-9) s.imag.push_back(lam.imag());
    }
    std::sort(s.imag.begin(), s.imag.end());
    require(s.max_real <= real_tol, ErrorKind::NumericalFailure,
            "eigenvalues leave the imaginary axis (max |Re| = " + std::to_string(s.max_real) + ")");
    return s;
}

inline double exact_eigenvalue(int k) { return (2.0 * k - 1.0) * std::numbers::pi / 2.0; }

enum class Method { Upwind, Comparison };

inline LineModel build_line_model(Method method, int n, double parameter) {
    return method == Method::Upwind ? build_1d_model(n, parameter) : build_comparison_1d_model(n, parameter);
}

// ---------------------------------------------------------------------------------------------
// Eigenvalue tables

struct EigTable {
    Method method = Method::Upwind;
    std::vector<double> parameters;
    std::vector<std::string> parameter_labels;
    std::vector<int> sizes;
    std::vector<int> modes;
    // values[p][s][m] is the mode-th eigenvalue for parameter p and size s, absent when mode > size
    std::vector<std::vector<std::vector<std::optional<double>>>> values;
    double max_real = 0.0;

    std::optional<double> at(std::size_t p, std::size_t s, std::size_t m) const { return values[p][s][m]; }

    std::string csv() const {
        std::ostringstream out;
        out.precision(10);
        out << "k";
        const char* name = method == Method::Upwind ? "alpha" : "alpha_prime";
        for (std::size_t p = 0; p < parameters.size(); ++p)
            for (int n : sizes) out << "," << name << "=" << parameter_labels[p] << ";N=" << n;
        out << ",exact\n";
        for (std::size_t m = 0; m < modes.size(); ++m) {
            out << modes[m];
            for (std::size_t p = 0; p < parameters.size(); ++p)
                for (std::size_t s = 0; s < sizes.size(); ++s) {
                    out << ",";
                    if (values[p][s][m]) out << *values[p][s][m];
                }
            out << "," << exact_eigenvalue(modes[m]) << "\n";
        }
        return out.str();
    }
};

inline EigTable eigenvalue_table(Method method, const std::vector<double>& params, const std::vector<std::string>& labels,
                                 const std::vector<int>& sizes, const std::vector<int>& modes) {
    EigTable t;
    t.method = method;
    t.parameters = params;
    t.parameter_labels = labels;
    t.sizes = sizes;
    t.modes = modes;
    t.values.assign(params.size(), std::vector<std::vector<std::optional<double>>>(sizes.size()));
    std::vector<double> max_real(params.size() * sizes.size(), 0.0);
    parallel_for(static_cast<int>(params.size() * sizes.size()), [&](int cell) {
        const std::size_t p = cell / sizes.size(), s = cell % sizes.size();
        const LineModel lm = build_line_model(method, sizes[s], params[p]);
        const Spectrum sp = spectrum(lm.model);
        max_real[cell] = sp.max_real;
        auto& col = t.values[p][s];
        col.assign(modes.size(), std::nullopt);
        for (std::size_t m = 0; m < modes.size(); ++m)
            if (modes[m] <= sizes[s] && modes[m] <= static_cast<int>(sp.imag.size())) col[m] = sp.imag[modes[m] - 1];
    });
    t.max_real = *std::max_element(max_real.begin(), max_real.end());
    return t;
}

inline const std::vector<int>& table_modes() {
    static const std::vector<int> modes{1, 2, 3, 4, 5, 10, 20, 40, 80};
    return modes;
}

inline EigTable table3() {
    return eigenvalue_table(Method::Upwind, {-1.0 / 12.0, 0.0, 1.0 / 6.0}, {"-1/12", "0", "1/6"}, {20, 40, 80},
                            table_modes());
}

inline EigTable table4() {
    return eigenvalue_table(Method::Comparison, {1.0 / 12.0, 0.0, -1.0 / 6.0}, {"1/12", "0", "-1/6"}, {20, 40, 80},
                            table_modes());
}

// ---------------------------------------------------------------------------------------------
// Convergence orders

struct ConvergenceRow {
    double parameter = 0.0;
    int n = 0;
    int k = 0;
    double value = 0.0;
    double rel_error = 0.0;
};

struct ConvergenceSlope {
    double parameter = 0.0;
    int k = 0;
    double slope = 0.0; // least-squares slope of log(rel_error) against log(N)
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    std::vector<ConvergenceSlope> slopes;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument, "need at least two points for a slope");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

inline ConvergenceStudy convergence_study(Method method, const std::vector<double>& params, const std::vector<int>& sizes,
                                          const std::vector<int>& modes) {
    require(!params.empty() && !sizes.empty() && !modes.empty(), ErrorKind::InvalidArgument, "empty study");
    std::vector<std::vector<double>> spectra(params.size() * sizes.size());
    parallel_for(static_cast<int>(spectra.size()), [&](int cell) {
        const std::size_t p = cell / sizes.size(), s = cell % sizes.size();
        spectra[cell] = spectrum(build_line_model(method, sizes[s], params[p]).model).imag;
    });
    ConvergenceStudy st;
    for (std::size_t p = 0; p < params.size(); ++p)
        for (int k : modes) {
            std::vector<double> ns, errs;
            for (std::size_t s = 0; s < sizes.size(); ++s) {
                const auto& im = spectra[p * sizes.size() + s];
                if (k > static_cast<int>(im.size())) continue;
                const double exact = exact_eigenvalue(k);
                const double err = std::abs(im[k - 1] - exact) / exact;
                st.rows.push_back({params[p], sizes[s], k, im[k - 1], err});
                ns.push_back(sizes[s]);
                errs.push_back(err);
            }
            if (ns.size() >= 2) st.slopes.push_back({params[p], k, loglog_slope(ns, errs)});
        }
    return st;
}

} // namespace phfem
