#include "biofv/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <set>

namespace biofv {

void TimeControls::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("TimeControls: " + m); };
    if (!(newton_tol > 0.0)) fail("newton_tol must be positive");
    if (newton_max_iter < 1) fail("newton_max_iter must be >= 1");
    if (!(dt_min > 0.0) || !(dt_min <= dt_init) || !(dt_init <= dt_max))
        fail("need 0 < dt_min <= dt_init <= dt_max");
    if (!(shrink > 0.0) || !(shrink < 1.0) || !(grow > 1.0))
        fail("need 0 < shrink < 1 < grow");
    if (mode == TimeMode::Fixed && !(dt_fixed > 0.0)) fail("dt_fixed must be positive");
}

namespace {

constexpr double kDomainCeiling = 1.0 - 1e-14;

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Solve with a given factorization object, verifying the residual bound and
// refining up to three times.
bool solve_verified(const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                    const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                    Eigen::VectorXd& x) {
    x = lu.solve(b);
    if (!x.allFinite()) return false;
    const double bound = 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXd r = b - A * x;
        if (r.lpNorm<Eigen::Infinity>() <= bound) return true;
        const Eigen::VectorXd corr = lu.solve(r);
        if (!corr.allFinite()) return false;
        x += corr;
    }
    return (b - A * x).lpNorm<Eigen::Infinity>() <= bound;
}

// Shared Newton workspace: the Jacobian sparsity pattern is fixed per mesh,
// so the symbolic analysis is done once and reused across steps.
struct NewtonWorkspace {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analyzed = false;
};

std::pair<State, NewtonReport> newton_step(const Mesh& mesh, const Nonlinearity& nl,
                                           const State& prev, double dt,
                                           const TimeControls& controls,
                                           const State* initial_guess, NewtonWorkspace* ws) {
    const int n = mesh.n_cells();
    State cand = initial_guess ? *initial_guess : prev;
    cand.t = prev.t;
    cand.k = prev.k;

    NewtonReport rep;
    rep.dt_used = dt;

    Residual res = assemble_residual(mesh, nl, prev, cand, dt);
    double res_norm = res.max_norm();

    NewtonWorkspace local;
    if (!ws) ws = &local;

    for (rep.iterations = 0; rep.iterations <= controls.newton_max_iter; ++rep.iterations) {
        if (res_norm <= controls.newton_tol) {
            rep.converged = true;
            break;
        }
        if (rep.iterations == controls.newton_max_iter) break;

        Eigen::SparseMatrix<double> J = assemble_jacobian(mesh, nl, cand, dt);
        Eigen::VectorXd rhs(2 * n);
        for (int K = 0; K < n; ++K) {
            rhs[2 * K] = -res.rS[K];
            rhs[2 * K + 1] = -res.rM[K];
        }
        if (!ws->analyzed) {
            ws->lu.analyzePattern(J);
            ws->analyzed = true;
        }
        ws->lu.factorize(J);
        Eigen::VectorXd delta;
        if (ws->lu.info() != Eigen::Success || !solve_verified(ws->lu, J, rhs, delta)) {
            rep.converged = false;
            rep.final_residual = res_norm;
            return {cand, rep};
        }

        std::vector<double> dS(n), dM(n);
        for (int K = 0; K < n; ++K) {
            dS[K] = delta[2 * K];
            dM[K] = delta[2 * K + 1];
        }
        double lambda = damp_into_domain(cand.M, dM);
        if (lambda == 0.0) {
            rep.converged = false;
            rep.final_residual = res_norm;
            return {cand, rep};
        }
        if (lambda < 1.0) ++rep.damping_events;

        // monotone line search: halve while the residual does not decrease
        State trial = cand;
        Residual trial_res;
        double trial_norm = 0.0;
        for (int halvings = 0;; ++halvings) {
            for (int K = 0; K < n; ++K) {
                trial.S[K] = cand.S[K] + lambda * dS[K];
                trial.M[K] = cand.M[K] + lambda * dM[K];
            }
            trial_res = assemble_residual(mesh, nl, prev, trial, dt);
            trial_norm = trial_res.max_norm();
            if (trial_norm < res_norm || halvings >= 8) break;
            lambda *= 0.5;
            ++rep.damping_events;
        }
        cand = std::move(trial);
        res = std::move(trial_res);
        res_norm = trial_norm;
    }

    rep.final_residual = res_norm;
    if (rep.converged) {
        cand.t = prev.t + dt;
        cand.k = prev.k + 1;
    }
    return {cand, rep};
}

void check_bounds(const State& st, double dt) {
    for (size_t K = 0; K < st.S.size(); ++K) {
        if (!(st.S[K] >= 0.0) || !(st.S[K] <= 1.0 + 1e-12))
            throw SolveError("bounds violation: S[" + std::to_string(K) + "] = " +
                                 std::to_string(st.S[K]) + " at step " + std::to_string(st.k) +
                                 ", t = " + std::to_string(st.t),
                             st.k, dt);
        if (!(st.M[K] >= 0.0) || !(st.M[K] < 1.0))
            throw SolveError("bounds violation: M[" + std::to_string(K) + "] = " +
                                 std::to_string(st.M[K]) + " at step " + std::to_string(st.k) +
                                 ", t = " + std::to_string(st.t),
                             st.k, dt);
    }
}

}  // namespace

std::vector<double> linear_solve(const Eigen::SparseMatrix<double>& A,
                                 std::span<const double> b) {
    if (A.rows() != A.cols() || A.rows() != static_cast<Eigen::Index>(b.size()))
        throw std::invalid_argument("linear_solve: dimension mismatch");
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> Ac = A;
    Ac.makeCompressed();
    lu.compute(Ac);
    if (lu.info() != Eigen::Success)
        throw LinearSolveBreakdown("linear_solve: singular or badly pivoted matrix");
    Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    Eigen::VectorXd x;
    if (!solve_verified(lu, Ac, bv, x))
        throw LinearSolveBreakdown("linear_solve: residual bound not met");
    return std::vector<double>(x.data(), x.data() + x.size());
}

double damp_into_domain(std::span<const double> M, std::span<double> dM) {
    if (M.size() != dM.size())
        throw std::invalid_argument("damp_into_domain: size mismatch");
    const double snap = 1e-14 * (1.0 + max_abs(dM));
    for (size_t K = 0; K < M.size(); ++K)
        if (M[K] + dM[K] < 0.0 && std::abs(dM[K]) <= snap) dM[K] = -M[K];

    double lambda = 1.0;
    for (int j = 0; j <= 30; ++j) {
        bool ok = true;
        for (size_t K = 0; K < M.size(); ++K) {
            const double Mn = M[K] + lambda * dM[K];
            if (!(Mn >= 0.0) || !(Mn <= kDomainCeiling)) {
                ok = false;
                break;
            }
        }
        if (ok) return lambda;
        lambda *= 0.5;
    }
    return 0.0;
}

std::pair<State, NewtonReport> newton_solve(const Mesh& mesh, const Nonlinearity& nl,
                                            const State& prev, double dt,
                                            const TimeControls& controls,
                                            const State* initial_guess) {
    if (!(dt > 0.0)) throw std::invalid_argument("newton_solve: dt must be positive");
    return newton_step(mesh, nl, prev, dt, controls, initial_guess, nullptr);
}

void advance_fixed(const Mesh& mesh, const Nonlinearity& nl, State& state, double dt,
                   long n_steps, const TimeControls& controls, const StepCallback& on_step) {
    if (!(dt > 0.0)) throw std::invalid_argument("advance_fixed: dt must be positive");
    controls.validate();
    NewtonWorkspace ws;
    for (long s = 0; s < n_steps; ++s) {
        auto [next, rep] = newton_step(mesh, nl, state, dt, controls, nullptr, &ws);
        if (!rep.converged)
            throw SolveError("Newton failed in fixed-step mode at step " +
                                 std::to_string(state.k + 1) + " (dt = " + std::to_string(dt) +
                                 ", residual = " + std::to_string(rep.final_residual) + ")",
                             state.k + 1, dt);
        check_bounds(next, dt);
        state = std::move(next);
        if (on_step)
            on_step(state, rep, make_diagnostics(mesh, nl, state, dt, rep.iterations));
    }
}

void advance_adaptive(const Mesh& mesh, const Nonlinearity& nl, State& state,
                      const TimeControls& controls, double t_end, const StepCallback& on_step,
                      std::span<const double> stop_points) {
    controls.validate();
    if (!(t_end > state.t)) throw std::invalid_argument("advance_adaptive: t_end <= t");

    std::set<double> stops(stop_points.begin(), stop_points.end());
    stops.insert(t_end);

    NewtonWorkspace ws;
    double dt_ctrl = std::min(controls.dt_init, controls.dt_max);
    const double t_eps = 1e-14 * std::max(1.0, std::abs(t_end));
    while (state.t < t_end - t_eps) {
        auto next_stop = stops.upper_bound(state.t + t_eps);
        const double horizon = (next_stop == stops.end()) ? t_end : std::min(*next_stop, t_end);
        double trial = std::min(dt_ctrl, horizon - state.t);

        auto [next, rep] = newton_step(mesh, nl, state, trial, controls, nullptr, &ws);
        if (rep.converged) {
            check_bounds(next, trial);
            state = std::move(next);
            if (std::abs(state.t - horizon) <= t_eps) state.t = horizon;  // land exactly
            if (on_step)
                on_step(state, rep, make_diagnostics(mesh, nl, state, trial, rep.iterations));
            dt_ctrl = std::min(controls.grow * trial, controls.dt_max);
        } else {
            if (trial <= controls.dt_min * (1.0 + 1e-12))
                throw SolveError(
                    "adaptive stepping failed at dt_min: step " + std::to_string(state.k + 1) +
                        ", t = " + std::to_string(state.t) + ", dt = " + std::to_string(trial) +
                        ", Newton residual = " + std::to_string(rep.final_residual) +
                        " after " + std::to_string(rep.iterations) + " iterations",
                    state.k + 1, trial);
            dt_ctrl = std::max(controls.shrink * trial, controls.dt_min);
        }
    }
}

}  // namespace biofv
