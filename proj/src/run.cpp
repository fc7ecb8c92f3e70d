#include "biofv/run.hpp"

#include "biofv/harness.hpp"
#include "biofv/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <cmath>
#include <iostream>

namespace biofv {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

void write_snapshot(const fs::path& dir, const Mesh& mesh, const State& st, double t) {
    auto out = open_out(dir / ("snap_" + format_double(t) + ".csv"));
    out << (mesh.dim() == 1 ? "cell_id,x,S,M\n" : "cell_id,x,y,S,M\n");
    for (int K = 0; K < mesh.n_cells(); ++K) {
        out << K << "," << format_double(mesh.cells()[K].center[0]);
        if (mesh.dim() == 2) out << "," << format_double(mesh.cells()[K].center[1]);
        out << "," << format_double(st.S[K]) << "," << format_double(st.M[K]) << "\n";
    }
}

int threads_hint() {
    int hint = 1;
    if (const char* env = std::getenv("BIOFILM_FV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) hint = static_cast<int>(v);
    }
    return hint;
}

}  // namespace

void cmd_run(const std::string& config_path, const std::string& out_dir,
             const std::optional<std::string>& snapshot_times_override) {
    RunConfig cfg = load_config(config_path);
    if (snapshot_times_override) {
        cfg.snapshot_times.clear();
        std::stringstream ss(*snapshot_times_override);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.snapshot_times.push_back(std::stod(item));
    }
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    const Mesh mesh = cfg.build_mesh();
    const Nonlinearity nl(cfg.params);
    State st = project_initial_data(mesh, cfg.make_S0(), cfg.make_M0());

    MonitorOptions mopt;
    mopt.m0 = cfg.m0;
    mopt.threshold = cfg.merge_threshold;
    InvariantMonitor monitor(mesh, nl, mopt);
    monitor.observe(st, 0.0);

    auto diag_out = open_out(dir / "diag.csv");
    diag_out << "t,dt,min_S,max_S,min_M,max_M,z_norm,f_h1_norm,s_h1_norm,"
                "newton_iterations,cells_above_threshold\n";
    auto write_diag = [&](const DiagnosticsRecord& d) {
        diag_out << format_double(d.t) << "," << format_double(d.dt) << ","
                 << format_double(d.min_S) << "," << format_double(d.max_S) << ","
                 << format_double(d.min_M) << "," << format_double(d.max_M) << ","
                 << (d.z_norm ? format_double(*d.z_norm) : std::string("nan")) << ","
                 << format_double(d.f_h1_norm) << "," << format_double(d.s_h1_norm) << ","
                 << d.newton_iterations << "," << d.cells_above_threshold << "\n";
    };
    write_diag(make_diagnostics(mesh, nl, st, 0.0, 0, cfg.merge_threshold));

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    write_snapshot(dir, mesh, st, 0.0);

    long steps = 0;
    long newton_total = 0;
    auto on_step = [&](const State& s, const NewtonReport& rep, const DiagnosticsRecord& d) {
        ++steps;
        newton_total += rep.iterations;
        monitor.observe(s, rep.dt_used);
        write_diag(d);
        for (double ts : snaps)
            if (ts > 0.0 && std::abs(s.t - ts) <= 1e-14 * std::max(1.0, ts))
                write_snapshot(dir, mesh, s, ts);
    };

    if (cfg.controls.mode == TimeMode::Fixed) {
        const long n_steps = std::llround(cfg.t_end / cfg.controls.dt_fixed);
        // fixed mode cannot stop at arbitrary times; snapshots land on the
        // nearest step boundary, checked here against the step grid
        advance_fixed(mesh, nl, st, cfg.controls.dt_fixed, n_steps, cfg.controls,
                      [&](const State& s, const NewtonReport& rep, const DiagnosticsRecord& d) {
                          ++steps;
                          newton_total += rep.iterations;
                          monitor.observe(s, rep.dt_used);
                          write_diag(d);
                          for (double ts : snaps)
                              if (ts > 0.0 &&
                                  std::llround(ts / cfg.controls.dt_fixed) == s.k)
                                  write_snapshot(dir, mesh, s, ts);
                      });
    } else {
        advance_adaptive(mesh, nl, st, cfg.controls, cfg.t_end, on_step, snaps);
    }
    write_snapshot(dir, mesh, st, st.t);

    const MonitorReport mrep = monitor.report();
    auto sum = open_out(dir / "summary.txt");
    sum << "config=" << config_path << "\n";
    sum << "cells=" << mesh.n_cells() << "\n";
    sum << "dim=" << mesh.dim() << "\n";
    sum << "steps=" << steps << "\n";
    sum << "newton_iterations_total=" << newton_total << "\n";
    sum << "final_t=" << format_double(st.t) << "\n";
    sum << "min_S=" << format_double(*std::min_element(st.S.begin(), st.S.end())) << "\n";
    sum << "max_S=" << format_double(*std::max_element(st.S.begin(), st.S.end())) << "\n";
    sum << "min_M=" << format_double(*std::min_element(st.M.begin(), st.M.end())) << "\n";
    sum << "max_M=" << format_double(*std::max_element(st.M.begin(), st.M.end())) << "\n";
    sum << "bounds_ok=" << (mrep.bounds_ok ? 1 : 0) << "\n";
    sum << "lower_bound_ok=" << (mrep.lower_bound_ok ? 1 : 0) << "\n";
    sum << "z_affine_ok=" << (mrep.z_affine_ok ? 1 : 0) << "\n";
    sum << "sum_dt_F_h1_sq=" << format_double(mrep.sum_dt_F_h1_sq) << "\n";
    sum << "sum_dt_S_h1_sq=" << format_double(mrep.sum_dt_S_h1_sq) << "\n";
    sum << "threads_hint=" << threads_hint() << "\n";
    if (!mrep.first_violation.empty()) sum << "violation=" << mrep.first_violation << "\n";

    if (!mrep.bounds_ok || !mrep.lower_bound_ok || !mrep.z_affine_ok)
        throw std::runtime_error("invariant monitor failed: " + mrep.first_violation);
}

ConvergenceTable cmd_convergence(const std::string& config_path, const std::string& out_dir,
                                 bool self_test) {
    fs::create_directories(out_dir);
    auto out = open_out(fs::path(out_dir) / "convergence.csv");
    out << "n_cells,h,err_S,err_M\n";

    if (self_test) {
        // synthetic exact-h^2 data exercises the table/fit plumbing
        std::vector<double> hs, errs;
        for (int n : {40, 80, 160}) {
            const double h = 1.0 / n, e = h * h;
            hs.push_back(h);
            errs.push_back(e);
            out << n << "," << format_double(h) << "," << format_double(e) << ","
                << format_double(e) << "\n";
        }
        ConvergenceTable table;
        for (size_t i = 0; i < hs.size(); ++i) {
            ConvergenceRow r;
            r.n_cells = static_cast<int>(std::lround(1.0 / hs[i]));
            r.h = hs[i];
            r.err_S = r.err_M = errs[i];
            table.rows.push_back(r);
        }
        table.slope_S = table.slope_M = fit_loglog_slope(hs, errs);
        out << "# slope_S=" << format_double(table.slope_S)
            << " slope_M=" << format_double(table.slope_M) << "\n";
        std::cout << "slope_S=" << format_double(table.slope_S)
                  << " slope_M=" << format_double(table.slope_M) << "\n";
        return table;
    }

    const RunConfig cfg = load_config(config_path);
    if (!std::holds_alternative<IntervalMeshSpec>(cfg.mesh))
        throw ConfigError("convergence study requires a 1D preset");
    if (cfg.grids.size() < 2) throw ConfigError("convergence study: need >= 2 grids");

    ConvergenceConfig cc;
    cc.grids = cfg.grids;
    cc.reference_n = cfg.reference_n;
    cc.dt = cfg.controls.dt_fixed;
    cc.t_end = cfg.t_end;
    cc.newton_tol = cfg.controls.newton_tol;
    cc.newton_max_iter = cfg.controls.newton_max_iter;
    const ConvergenceTable table = run_convergence_study(cc);

    for (const auto& r : table.rows)
        out << r.n_cells << "," << format_double(r.h) << "," << format_double(r.err_S) << ","
            << format_double(r.err_M) << "\n";
    out << "# slope_S=" << format_double(table.slope_S)
        << " slope_M=" << format_double(table.slope_M) << "\n";
    std::cout << "slope_S=" << format_double(table.slope_S)
              << " slope_M=" << format_double(table.slope_M) << "\n";
    return table;
}

bool cmd_check_mesh(const std::string& mesh_path) {
    const TriMeshData data = read_mesh_file(mesh_path);
    const Mesh mesh = build_triangular_mesh(data.nodes, data.triangles);
    const AdmissibilityReport rep = validate_admissibility(mesh);

    const bool pass = rep.xi_observed > 0.0 &&
                      rep.estmesh_lhs <= rep.estmesh_rhs + 1e-10 &&
                      rep.orthogonality_max_violation <= 1e-10 &&
                      rep.diamond_identity_max_rel <= 1e-10 &&
                      rep.dual_partition_rel_defect <= 1e-10;

    std::cout << "cells=" << mesh.n_cells() << "\n";
    std::cout << "edges=" << mesh.n_edges() << "\n";
    std::cout << "boundary_edges=" << mesh.n_boundary_edges() << "\n";
    std::cout << "total_measure=" << format_double(rep.total_measure) << "\n";
    std::cout << "xi_observed=" << format_double(rep.xi_observed) << "\n";
    std::cout << "estmesh_lhs=" << format_double(rep.estmesh_lhs) << "\n";
    std::cout << "estmesh_rhs=" << format_double(rep.estmesh_rhs) << "\n";
    std::cout << "orthogonality_max_violation="
              << format_double(rep.orthogonality_max_violation) << "\n";
    std::cout << "diamond_identity_max_rel=" << format_double(rep.diamond_identity_max_rel)
              << "\n";
    std::cout << "dual_partition_rel_defect=" << format_double(rep.dual_partition_rel_defect)
              << "\n";
    std::cout << "admissible=" << (pass ? 1 : 0) << "\n";
    return pass;
}

void cmd_gen_mesh(int nx, int ny, const std::string& out_path) {
    const TriMeshData data = generate_acute_square_mesh(nx, ny);
    build_triangular_mesh(data.nodes, data.triangles);  // hard-validate before writing
    write_mesh_file(data, out_path);
}

}  // namespace biofv
