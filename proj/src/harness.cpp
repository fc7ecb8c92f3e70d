#include "biofv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace biofv {

DiagnosticsRecord make_diagnostics(const Mesh& mesh, const Nonlinearity& nl,
                                   const State& state, double dt, int newton_iterations,
                                   double threshold) {
    DiagnosticsRecord d;
    d.t = state.t;
    d.dt = dt;
    d.newton_iterations = newton_iterations;
    d.threshold = threshold;
    d.min_S = *std::min_element(state.S.begin(), state.S.end());
    d.max_S = *std::max_element(state.S.begin(), state.S.end());
    d.min_M = *std::min_element(state.M.begin(), state.M.end());
    d.max_M = *std::max_element(state.M.begin(), state.M.end());
    d.cells_above_threshold =
        static_cast<int>(std::count_if(state.M.begin(), state.M.end(),
                                       [&](double m) { return m > threshold; }));

    const int n = mesh.n_cells();
    std::vector<double> FM(n);
    for (int K = 0; K < n; ++K) FM[K] = nl.F(state.M[K]);
    const std::vector<double> f_bnd(mesh.n_boundary_edges(), nl.F(nl.params().MD));
    const std::vector<double> s_bnd(mesh.n_boundary_edges(), ModelParams::SD);
    d.f_h1_norm = discrete_norm_h1(mesh, FM, f_bnd);
    d.s_h1_norm = discrete_norm_h1(mesh, state.S, s_bnd);

    if (nl.params().MD > 0.0) {
        std::vector<double> ZM(n);
        for (int K = 0; K < n; ++K) ZM[K] = nl.Z(state.M[K]);
        d.z_norm = discrete_norm_lp(mesh, ZM, 1);
    }
    return d;
}

std::optional<double> kappa_star(const ModelParams& params) {
    if (params.kappa3 <= params.kappa2) return std::nullopt;
    return params.kappa2 * params.kappa4 / (params.kappa3 - params.kappa2);
}

int connected_components(const Mesh& mesh, std::span<const char> flags) {
    if (static_cast<int>(flags.size()) != mesh.n_cells())
        throw std::invalid_argument("connected_components: flag count mismatch");
    std::vector<int> parent(mesh.n_cells());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Edge& e : mesh.edges())
        if (e.kind == EdgeKind::Interior && flags[e.K] && flags[e.L])
            parent[find(e.K)] = find(e.L);
    int count = 0;
    for (int K = 0; K < mesh.n_cells(); ++K)
        if (flags[K] && find(K) == K) ++count;
    return count;
}

double l1_error_vs_reference(const Mesh& coarse, std::span<const double> coarse_field,
                             const Mesh& fine, std::span<const double> fine_field) {
    if (coarse.dim() != 1 || fine.dim() != 1)
        throw std::invalid_argument("l1_error_vs_reference: uniform 1D meshes only");
    const int nc = coarse.n_cells(), nf = fine.n_cells();
    if (static_cast<int>(coarse_field.size()) != nc ||
        static_cast<int>(fine_field.size()) != nf)
        throw std::invalid_argument("l1_error_vs_reference: field size mismatch");
    if (nf % nc != 0)
        throw std::invalid_argument("l1_error_vs_reference: fine cell count " +
                                    std::to_string(nf) + " is not a multiple of " +
                                    std::to_string(nc));
    const int ratio = nf / nc;
    double err = 0.0;
    for (int K = 0; K < nc; ++K) {
        double avg = 0.0;
        for (int j = 0; j < ratio; ++j) avg += fine_field[K * ratio + j];
        avg /= ratio;
        err += coarse.cells()[K].measure * std::abs(coarse_field[K] - avg);
    }
    return err;
}

double fit_loglog_slope(std::span<const double> h, std::span<const double> err) {
    if (h.size() != err.size() || h.size() < 2)
        throw std::invalid_argument("fit_loglog_slope: need >= 2 grids");
    const int n = static_cast<int>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Test1Data test1_data() {
    Test1Data d;
    d.params.d1 = 4.1667;
    d.params.d2 = 4.2;
    d.params.kappa1 = 793.65;
    d.params.kappa2 = 0.067;
    d.params.kappa3 = 1.0;
    d.params.kappa4 = 0.4;
    d.params.a = 2.0;
    d.params.b = 1.0;
    d.params.MD = 0.0;
    d.S0 = [](double x, double) { return 1.0 - 0.2 * std::sin(std::numbers::pi * x); };
    d.M0 = [](double x, double) {
        auto bump = [](double z) { return std::max(1.0 - 81.0 * z * z, 0.0); };
        return 0.2 * bump(x - 0.38) + 0.9 * bump(x - 0.62);
    };
    return d;
}

ConvergenceTable run_convergence_study(const ConvergenceConfig& config) {
    if (config.grids.size() < 2)
        throw std::invalid_argument("run_convergence_study: need >= 2 grids");
    for (int n : config.grids)
        if (n < 1 || config.reference_n % n != 0)
            throw std::invalid_argument("run_convergence_study: grid " + std::to_string(n) +
                                        " does not divide the reference " +
                                        std::to_string(config.reference_n));
    const long n_steps = std::llround(config.t_end / config.dt);
    if (std::abs(n_steps * config.dt - config.t_end) > 1e-8 * config.t_end)
        throw std::invalid_argument("run_convergence_study: t_end must be a multiple of dt");

    const Test1Data data = test1_data();
    const Nonlinearity nl(data.params);

    TimeControls tc;
    tc.mode = TimeMode::Fixed;
    tc.dt_fixed = config.dt;
    tc.newton_tol = config.newton_tol;
    tc.newton_max_iter = config.newton_max_iter;
    tc.dt_min = std::min(tc.dt_min, config.dt);
    tc.dt_init = config.dt;
    tc.dt_max = std::max(tc.dt_max, config.dt);

    auto solve_grid = [&](int n, ConvergenceRow& row) {
        const Mesh mesh = build_interval_mesh(n, 0.0, 1.0);
        State st = project_initial_data(mesh, data.S0, data.M0);
        try {
            advance_fixed(mesh, nl, st, config.dt, n_steps, tc,
                          [&](const State&, const NewtonReport& rep,
                              const DiagnosticsRecord& diag) {
                              row.sum_dt_F_h1_sq += rep.dt_used * diag.f_h1_norm * diag.f_h1_norm;
                              row.sum_dt_S_h1_sq += rep.dt_used * diag.s_h1_norm * diag.s_h1_norm;
                          });
        } catch (const SolveError& e) {
            throw SolveError("convergence study failed on the " + std::to_string(n) +
                                 "-cell grid: " + e.what(),
                             e.step, e.dt);
        }
        return st;
    };

    ConvergenceRow ref_row;
    const State ref = solve_grid(config.reference_n, ref_row);
    const Mesh ref_mesh = build_interval_mesh(config.reference_n, 0.0, 1.0);

    ConvergenceTable table;
    table.reference_n = config.reference_n;
    std::vector<int> grids = config.grids;
    std::sort(grids.begin(), grids.end());  // h strictly decreasing down the table
    for (int n : grids) {
        ConvergenceRow row;
        row.n_cells = n;
        row.h = 1.0 / n;
        const State st = solve_grid(n, row);
        const Mesh mesh = build_interval_mesh(n, 0.0, 1.0);
        row.err_S = l1_error_vs_reference(mesh, st.S, ref_mesh, ref.S);
        row.err_M = l1_error_vs_reference(mesh, st.M, ref_mesh, ref.M);
        table.rows.push_back(row);
    }
    std::vector<double> hs, eS, eM;
    for (const auto& r : table.rows) {
        hs.push_back(r.h);
        eS.push_back(r.err_S);
        eM.push_back(r.err_M);
    }
    table.slope_S = fit_loglog_slope(hs, eS);
    table.slope_M = fit_loglog_slope(hs, eM);
    return table;
}

Test2Data test2_data(double bump_sharpness) {
    Test2Data d;
    d.params = test1_data().params;
    d.params.a = 4.0;
    d.params.b = 4.0;
    d.S0 = [](double, double) { return 1.0; };
    const double c = bump_sharpness;
    d.M0 = [c](double x, double y) {
        auto p = [c](double u, double v) { return std::max(1.0 - c * (u * u + v * v), 0.0); };
        return 0.3 * p(x - 0.4, y - 0.5) + 0.9 * p(x - 0.6, y - 0.5);
    };
    return d;
}

TimeControls floc_controls() {
    TimeControls tc;
    tc.mode = TimeMode::Adaptive;
    tc.newton_tol = 1e-8;
    tc.newton_max_iter = 50;
    tc.dt_min = 1e-8;
    tc.dt_max = 1e-2;
    tc.dt_init = 1e-5;
    return tc;
}

FlocResult run_floc_experiment(const FlocConfig& config, const Mesh& mesh) {
    const Test2Data data = test2_data(config.bump_sharpness);
    const Nonlinearity nl(data.params);

    FlocResult result;
    for (const Cell& c : mesh.cells())
        result.max_cell_measure = std::max(result.max_cell_measure, c.measure);

    auto support_measure = [&](const State& st) {
        double m = 0.0;
        for (int K = 0; K < mesh.n_cells(); ++K)
            if (st.M[K] > config.merge_threshold) m += mesh.cells()[K].measure;
        return m;
    };
    auto component_count = [&](const State& st) {
        std::vector<char> flags(mesh.n_cells());
        for (int K = 0; K < mesh.n_cells(); ++K)
            flags[K] = st.M[K] > config.merge_threshold ? 1 : 0;
        return connected_components(mesh, flags);
    };

    State st = project_initial_data(mesh, data.S0, data.M0);
    result.initial_components = component_count(st);
    result.initial_support_measure = support_measure(st);
    result.snapshots.push_back({0.0, st});
    result.diagnostics.push_back(
        make_diagnostics(mesh, nl, st, 0.0, 0, config.merge_threshold));

    std::vector<double> stop_points = config.snapshot_times;
    std::sort(stop_points.begin(), stop_points.end());

    double prev_support = result.initial_support_measure;
    advance_adaptive(mesh, nl, st, config.controls, config.t_end,
                     [&](const State& s, const NewtonReport& rep, const DiagnosticsRecord&) {
                         result.diagnostics.push_back(make_diagnostics(
                             mesh, nl, s, rep.dt_used, rep.iterations, config.merge_threshold));
                         const double sup = support_measure(s);
                         result.max_support_drop =
                             std::max(result.max_support_drop, prev_support - sup);
                         prev_support = sup;
                         if (!result.merge_time && component_count(s) == 1)
                             result.merge_time = s.t;
                         for (double ts : stop_points)
                             if (std::abs(s.t - ts) <= 1e-14 * std::max(1.0, ts))
                                 result.snapshots.push_back({ts, s});
                     },
                     stop_points);
    result.final_support_measure = support_measure(st);
    return result;
}

InvariantMonitor::InvariantMonitor(const Mesh& mesh, const Nonlinearity& nl,
                                   MonitorOptions options)
    : mesh_(mesh), nl_(nl), opt_(std::move(options)) {
    if (opt_.m0) lower_bound_ = *opt_.m0;
}

void InvariantMonitor::observe(const State& state, double dt) {
    const auto record_violation = [&](const std::string& what) {
        if (partial_.first_violation.empty())
            partial_.first_violation = what + " at step " + std::to_string(state.k) +
                                       ", t = " + std::to_string(state.t);
    };

    for (int K = 0; K < mesh_.n_cells(); ++K) {
        if (!(state.S[K] >= 0.0) || !(state.S[K] <= 1.0 + 1e-12)) {
            partial_.bounds_ok = false;
            record_violation("S bound violated in cell " + std::to_string(K) + " (S = " +
                             std::to_string(state.S[K]) + ")");
        }
        if (!(state.M[K] >= 0.0) || !(state.M[K] < 1.0)) {
            partial_.bounds_ok = false;
            record_violation("M bound violated in cell " + std::to_string(K) + " (M = " +
                             std::to_string(state.M[K]) + ")");
        }
    }

    if (has_initial_ && dt > 0.0) {
        if (opt_.m0) {
            lower_bound_ /= 1.0 + nl_.params().kappa2 * dt;
            for (int K = 0; K < mesh_.n_cells(); ++K)
                if (state.M[K] < lower_bound_ - opt_.lower_bound_slack) {
                    partial_.lower_bound_ok = false;
                    record_violation("positivity bound violated in cell " + std::to_string(K) +
                                     " (M = " + std::to_string(state.M[K]) + " < " +
                                     std::to_string(lower_bound_) + ")");
                }
        }
        const DiagnosticsRecord d =
            make_diagnostics(mesh_, nl_, state, dt, 0, opt_.threshold);
        partial_.sum_dt_F_h1_sq += dt * d.f_h1_norm * d.f_h1_norm;
        partial_.sum_dt_S_h1_sq += dt * d.s_h1_norm * d.s_h1_norm;
        ++partial_.steps_observed;
        if (d.z_norm) z_history_.emplace_back(state.t, *d.z_norm);
    } else if (!has_initial_) {
        has_initial_ = true;
        if (nl_.params().MD > 0.0) {
            const DiagnosticsRecord d =
                make_diagnostics(mesh_, nl_, state, 0.0, 0, opt_.threshold);
            if (d.z_norm) z_history_.emplace_back(state.t, *d.z_norm);
        }
    }
}

MonitorReport InvariantMonitor::report() const {
    MonitorReport rep = partial_;
    if (z_history_.size() >= 3) {
        const double t0 = z_history_.front().first;
        const double z0 = z_history_.front().second;
        // fit the affine constant on the first half, then require the bound
        // (with 5% headroom and an absolute floor) on the whole trajectory
        double c_fit = 0.0;
        const size_t half = z_history_.size() / 2;
        for (size_t i = 1; i <= half; ++i) {
            const auto& [t, z] = z_history_[i];
            if (t > t0) c_fit = std::max(c_fit, (z - z0) / (t - t0));
        }
        rep.z_affine_C = c_fit;
        const double slack = 1e-9 * (1.0 + z0);
        for (const auto& [t, z] : z_history_)
            if (z > z0 + 1.05 * c_fit * (t - t0) + slack) {
                rep.z_affine_ok = false;
                if (rep.first_violation.empty())
                    rep.first_violation = "entropy bound ||Z|| exceeded its affine envelope at t = " +
                                          std::to_string(t);
                break;
            }
    }
    return rep;
}

}  // namespace biofv
