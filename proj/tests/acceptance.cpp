// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria can be selected by number on the command line.

#include "biofv/harness.hpp"
#include "biofv/mesh.hpp"
#include "biofv/model.hpp"
#include "biofv/scheme.hpp"
#include "biofv/solver.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace biofv;

namespace {

int g_failures = 0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%d] %-28s %s  (%s)\n", id, name.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// adaptive Simpson quadrature, independent of the library integration path
double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double floor = 5e-15 * std::abs(left + right);  // double resolution
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * std::max(tol, floor))
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 30);
}

Mesh floc_mesh(const FlocConfig& fc) {
    const TriMeshData data = generate_acute_square_mesh(fc.nx, fc.ny);
    return build_triangular_mesh(data.nodes, data.triangles);
}

// ---- criterion 1 + 6: the 2D desk-scale floc run is shared ----

struct FlocOutcome {
    bool ran = false;
    bool bounds_ok = false;
    std::string bounds_detail;
    FlocResult result;
};

FlocOutcome run_floc_once() {
    FlocOutcome out;
    FlocConfig fc;  // nx=36, ny=50 -> 3600 triangles, T=0.1
    fc.controls = floc_controls();
    const Mesh mesh = floc_mesh(fc);
    try {
        out.result = run_floc_experiment(fc, mesh);
        out.ran = true;
    } catch (const std::exception& e) {
        out.bounds_detail = std::string("run failed: ") + e.what();
        return out;
    }
    out.bounds_ok = true;
    for (const DiagnosticsRecord& d : out.result.diagnostics) {
        if (!(d.min_S >= 0.0) || !(d.max_S <= 1.0 + 1e-12) || !(d.min_M >= 0.0) ||
            !(d.max_M < 1.0)) {
            out.bounds_ok = false;
            out.bounds_detail = "violation at t = " + std::to_string(d.t);
            break;
        }
    }
    if (out.bounds_ok)
        out.bounds_detail = "2D run ok, final max_M = " +
                            fmt(out.result.diagnostics.back().max_M);
    return out;
}

void criterion_bounds(const FlocOutcome& floc) {
    // 1D part: test case 1 on the 80-cell grid to T = 1e-3
    const Test1Data data = test1_data();
    const Nonlinearity nl(data.params);
    const Mesh mesh = build_interval_mesh(80, 0.0, 1.0);
    State st = project_initial_data(mesh, data.S0, data.M0);
    TimeControls tc;
    tc.mode = TimeMode::Fixed;
    tc.newton_tol = 1e-10;
    bool ok1 = true;
    std::string det1;
    double minS = 1e300, maxS = -1e300, maxM = -1e300, minM = 1e300;
    try {
        advance_fixed(mesh, nl, st, 1e-6, 1000, tc,
                      [&](const State&, const NewtonReport&, const DiagnosticsRecord& d) {
                          minS = std::min(minS, d.min_S);
                          maxS = std::max(maxS, d.max_S);
                          minM = std::min(minM, d.min_M);
                          maxM = std::max(maxM, d.max_M);
                          if (!(d.min_S >= 0.0) || !(d.max_S <= 1.0 + 1e-12) ||
                              !(d.min_M >= 0.0) || !(d.max_M < 1.0))
                              ok1 = false;
                      });
    } catch (const std::exception& e) {
        ok1 = false;
        det1 = e.what();
    }
    if (det1.empty())
        det1 = "1D: S in [" + fmt(minS) + "," + fmt(maxS) + "], M in [" + fmt(minM) + "," +
               fmt(maxM) + "]";
    const bool ok = ok1 && floc.ran && floc.bounds_ok;
    report(1, "bounds-invariant", ok, det1 + "; " + floc.bounds_detail);
}

void criterion_positivity_decay() {
    Test1Data data = test1_data();
    data.params.MD = 0.1;
    const Nonlinearity nl(data.params);
    const Mesh mesh = build_interval_mesh(50, 0.0, 1.0);
    State st = project_initial_data(mesh, data.S0, [](double, double) { return 0.1; });

    TimeControls tc = floc_controls();
    tc.newton_tol = 1e-10;

    MonitorOptions opts;
    opts.m0 = 0.1;
    InvariantMonitor monitor(mesh, nl, opts);
    monitor.observe(st, 0.0);
    bool ran = true;
    std::string detail;
    try {
        advance_adaptive(mesh, nl, st, tc, 1.0,
                         [&](const State& s, const NewtonReport& rep,
                             const DiagnosticsRecord&) { monitor.observe(s, rep.dt_used); });
    } catch (const std::exception& e) {
        ran = false;
        detail = e.what();
    }
    const MonitorReport rep = monitor.report();
    const bool pass = ran && rep.bounds_ok && rep.lower_bound_ok;
    if (detail.empty())
        detail = "steps = " + std::to_string(rep.steps_observed) +
                 (rep.first_violation.empty() ? "" : "; " + rep.first_violation);
    report(2, "positivity-decay", pass, detail);
}

void criterion_convergence_rate() {
    ConvergenceConfig cc;  // grids 40..320, reference 2560, dt = 1e-7, T = 1e-3
    bool ran = true;
    ConvergenceTable table;
    std::string detail;
    try {
        table = run_convergence_study(cc);
    } catch (const std::exception& e) {
        ran = false;
        detail = e.what();
    }
    if (ran) {
        detail = "slope_M = " + fmt(table.slope_M) + ", slope_S = " + fmt(table.slope_S);
        for (const auto& r : table.rows)
            detail += "; n=" + std::to_string(r.n_cells) + " errM=" + fmt(r.err_M);
    }
    const bool pass = ran && table.slope_M >= 1.7 && table.slope_M <= 2.3;
    report(3, "spatial-convergence-rate", pass, detail);
}

void criterion_jacobian() {
    std::mt19937 rng(20240511);
    std::uniform_real_distribution<double> uS(0.0, 1.0), uM(0.01, 0.9);
    const std::vector<std::array<double, 2>> nodes{
        {0, 0}, {1, 0}, {2, 0}, {0.5, 0.9}, {1.5, 0.9}, {2.5, 0.9}};
    const Mesh tri = build_triangular_mesh(nodes, {{0, 1, 3}, {1, 4, 3}, {1, 2, 4}, {2, 5, 4}});
    const Mesh line = build_interval_mesh(10, 0.0, 1.0);

    double worst = 0.0;
    bool pass = true;
    for (int draw = 0; draw < 20; ++draw) {
        const Mesh& mesh = (draw % 2 == 0) ? line : tri;
        ModelParams p;
        p.a = (draw < 10) ? 2.0 : 4.0;
        p.b = (draw < 10) ? 1.0 : 4.0;
        const Nonlinearity nl(p);
        const int n = mesh.n_cells();
        State cand, prev;
        cand.S.resize(n);
        cand.M.resize(n);
        prev = cand;
        for (int i = 0; i < n; ++i) {
            cand.S[i] = uS(rng);
            cand.M[i] = uM(rng);
            prev.S[i] = uS(rng);
            prev.M[i] = uM(rng);
        }
        const double dt = 1e-4;
        const Eigen::MatrixXd Ja = assemble_jacobian(mesh, nl, cand, dt).toDense();
        const double scale = Ja.cwiseAbs().maxCoeff();
        const double step = 1e-7;
        for (int j = 0; j < 2 * n; ++j) {
            State plus = cand, minus = cand;
            ((j % 2 == 0) ? plus.S[j / 2] : plus.M[j / 2]) += step;
            ((j % 2 == 0) ? minus.S[j / 2] : minus.M[j / 2]) -= step;
            const Residual rp = assemble_residual(mesh, nl, prev, plus, dt);
            const Residual rm = assemble_residual(mesh, nl, prev, minus, dt);
            for (int i = 0; i < n; ++i) {
                const double fdS = (rp.rS[i] - rm.rS[i]) / (2 * step);
                const double fdM = (rp.rM[i] - rm.rM[i]) / (2 * step);
                const double eS =
                    std::abs(Ja(2 * i, j) - fdS) / std::max(std::abs(Ja(2 * i, j)), 1e-3 * scale);
                const double eM = std::abs(Ja(2 * i + 1, j) - fdM) /
                                  std::max(std::abs(Ja(2 * i + 1, j)), 1e-3 * scale);
                worst = std::max({worst, eS, eM});
                if (eS > 1e-5 || eM > 1e-5) pass = false;
            }
        }
    }
    report(4, "jacobian-vs-fd", pass, "max elementwise rel err = " + fmt(worst));
}

void criterion_mesh_identities() {
    bool pass = true;
    std::string detail;
    auto check_mesh = [&](const Mesh& m, const std::string& name) {
        const AdmissibilityReport r = validate_admissibility(m);
        const bool ok = r.diamond_identity_max_rel <= 1e-10 &&
                        r.estmesh_lhs <= r.estmesh_rhs + 1e-10 &&
                        r.dual_partition_rel_defect <= 1e-10 && r.xi_observed > 0.0;
        if (!ok) {
            pass = false;
            detail += name + " failed; ";
        }
    };
    for (int n : {1, 2, 10, 80}) check_mesh(build_interval_mesh(n, 0.0, 1.0), "1D/" + std::to_string(n));
    for (auto [nx, ny] : {std::pair{8, 12}, std::pair{16, 22}, std::pair{36, 50}}) {
        const TriMeshData d = generate_acute_square_mesh(nx, ny);
        check_mesh(build_triangular_mesh(d.nodes, d.triangles),
                   std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (pass) detail = "(2.para), estmesh, dual partition within 1e-10 on all generated meshes";
    report(5, "mesh-identities", pass, detail);
}

void criterion_merging(const FlocOutcome& floc) {
    if (!floc.ran) {
        report(6, "colony-merging", false, floc.bounds_detail);
        return;
    }
    const FlocResult& r = floc.result;
    const bool merged = r.merge_time.has_value() && *r.merge_time < 0.1;
    const bool grew = r.final_support_measure > r.initial_support_measure;
    const bool pass = r.initial_components == 2 && merged && grew;
    std::string detail = "components(t=0) = " + std::to_string(r.initial_components) +
                         ", merge at t = " +
                         (r.merge_time ? fmt(*r.merge_time) : std::string("never")) +
                         ", support " + fmt(r.initial_support_measure) + " -> " +
                         fmt(r.final_support_measure);
    report(6, "colony-merging", pass, detail);
}

void criterion_nonlinearity_oracles() {
    bool pass = true;
    double worstF = 0.0;
    for (double preset : {0.0, 1.0}) {
        ModelParams p;
        p.a = (preset == 0.0) ? 2.0 : 4.0;
        p.b = (preset == 0.0) ? 1.0 : 4.0;
        const Nonlinearity nl(p);
        double quad = 0.0, prevM = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double M = 0.999 * i / 999.0;
            quad += integrate([&](double s) { return nl.f(s); }, prevM, M);
            prevM = M;
            const double closed = nl.F(M);
            const double err = std::abs(closed - quad) / (1.0 + std::abs(closed));
            worstF = std::max(worstF, err);
            if (err > 1e-10) pass = false;
        }
    }
    double worstR = 0.0;
    ModelParams p;
    p.MD = 0.5;
    const Nonlinearity nl(p);
    for (double eps : {1e-2, 1e-6})
        for (int i = 0; i <= 200; ++i) {
            const double M = 1e-6 + (1.0 - 2e-6) * i / 200.0;
            const double back = nl.entropy_inverse(nl.entropy_variable(M, eps), eps);
            worstR = std::max(worstR, std::abs(back - M));
            if (std::abs(back - M) > 1e-10) pass = false;
        }
    report(7, "nonlinearity-oracles", pass,
           "max F defect (rel) = " + fmt(worstF) + ", max roundtrip defect = " + fmt(worstR));
}

void criterion_single_cell() {
    std::mt19937 rng(7771);
    std::uniform_real_distribution<double> uS(0.1, 1.0), uM(0.01, 0.9), udt(1e-4, 1e-2),
        uk(0.0, 2.0);
    const Mesh mesh = build_interval_mesh(1, 0.0, 1.0);
    TimeControls tc;
    tc.mode = TimeMode::Fixed;
    tc.newton_tol = 1e-11;

    double worst = 0.0;
    bool pass = true;
    for (int draw = 0; draw < 50; ++draw) {
        ModelParams p;
        p.a = (draw % 2 == 0) ? 2.0 : 4.0;
        p.b = (draw % 2 == 0) ? 1.0 : 4.0;
        p.kappa1 = uk(rng);
        p.kappa2 = 0.5 * uk(rng);
        p.kappa3 = uk(rng);
        p.kappa4 = 0.2 + 0.5 * uk(rng);
        p.MD = (draw % 3 == 0) ? 0.0 : 0.3;
        const Nonlinearity nl(p);
        State prev;
        prev.S = {uS(rng)};
        prev.M = {uM(rng)};
        const double dt = udt(rng);
        const auto [st, rep] = newton_solve(mesh, nl, prev, dt, tc);
        if (!rep.converged) {
            pass = false;
            continue;
        }
        // independent scalar solve: nested bisection on the two equations
        auto resid = [&](double S, double M) {
            State c;
            c.S = {S};
            c.M = {M};
            return assemble_residual(mesh, nl, prev, c, dt);
        };
        auto solve_S = [&](double M) {
            double lo = -1.0, hi = 3.0;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                (resid(mid, M).rS[0] > 0.0 ? hi : lo) = mid;
            }
            return 0.5 * (lo + hi);
        };
        double lo = 0.0, hi = 1.0 - 1e-12;
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            (resid(solve_S(mid), mid).rM[0] > 0.0 ? hi : lo) = mid;
        }
        const double M_o = 0.5 * (lo + hi), S_o = solve_S(M_o);
        worst = std::max({worst, std::abs(st.S[0] - S_o), std::abs(st.M[0] - M_o)});
        if (std::abs(st.S[0] - S_o) > 1e-9 || std::abs(st.M[0] - M_o) > 1e-9) pass = false;
    }
    report(8, "single-cell-oracle", pass, "max |newton - bisection| = " + fmt(worst));
}

void criterion_uniqueness_surrogate() {
    const Test1Data data = test1_data();
    const Nonlinearity nl(data.params);
    const Mesh mesh = build_interval_mesh(80, 0.0, 1.0);
    State st = project_initial_data(mesh, data.S0, data.M0);

    TimeControls tc;
    tc.mode = TimeMode::Fixed;
    tc.newton_tol = 1e-10;  // the 1D default; 1e-12 sits below the residual
                            // roundoff floor of m(K)/dt on this grid

    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    const double dt = 1e-6;

    double worst = 0.0;
    bool pass = true;
    int sampled = 0;
    for (int step = 1; step <= 100; ++step) {
        const auto [next, rep] = newton_solve(mesh, nl, st, dt, tc);
        if (!rep.converged) {
            pass = false;
            break;
        }
        if (step % 5 == 0) {
            ++sampled;
            State guess = st;
            for (int i = 0; i < mesh.n_cells(); ++i) {
                guess.S[i] *= 1.0 + u(rng);
                guess.M[i] = std::min(guess.M[i] * (1.0 + u(rng)), 1.0 - 1e-13);
            }
            const auto [alt, rep2] = newton_solve(mesh, nl, st, dt, tc, &guess);
            if (!rep2.converged) {
                pass = false;
                break;
            }
            const double dev =
                std::max(max_abs_diff(next.S, alt.S), max_abs_diff(next.M, alt.M));
            worst = std::max(worst, dev);
            if (dev > 1e-8) pass = false;
        }
        st = next;
    }
    report(9, "uniqueness-surrogate", pass,
           std::to_string(sampled) + " sampled steps, max deviation = " + fmt(worst));
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return selected.empty() || selected.count(id) > 0; };

    const auto t0 = std::chrono::steady_clock::now();

    FlocOutcome floc;
    if (want(1) || want(6)) floc = run_floc_once();

    if (want(1)) criterion_bounds(floc);
    if (want(2)) criterion_positivity_decay();
    if (want(3)) criterion_convergence_rate();
    if (want(4)) criterion_jacobian();
    if (want(5)) criterion_mesh_identities();
    if (want(6)) criterion_merging(floc);
    if (want(7)) criterion_nonlinearity_oracles();
    if (want(8)) criterion_single_cell();
    if (want(9)) criterion_uniqueness_surrogate();

    const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::printf("%s (%d failed, %llds)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures, static_cast<long long>(dt));
    return g_failures == 0 ? 0 : 1;
}
