#ifndef BIOFV_SOLVER_HPP
#define BIOFV_SOLVER_HPP

#include "biofv/diagnostics.hpp"
#include "biofv/mesh.hpp"
#include "biofv/model.hpp"
#include "biofv/scheme.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <span>
#include <stdexcept>

namespace biofv {

enum class TimeMode { Fixed, Adaptive };

/// Newton tolerances and the adaptive step-size policy: shrink by 0.2 on
/// Newton failure, grow by 1.1 at the start of each step, dt clamped to
/// [dt_min, dt_max].
struct TimeControls {
    double newton_tol = 1e-10;  ///< residual max-norm tolerance
    int newton_max_iter = 50;
    double dt_min = 1e-8;
    double dt_max = 1e-2;
    double dt_init = 1e-5;
    double shrink = 0.2;
    double grow = 1.1;
    TimeMode mode = TimeMode::Adaptive;
    double dt_fixed = 1e-6;  ///< step size in fixed mode

    void validate() const;
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
    int damping_events = 0;
    double dt_used = 0.0;
};

/// Unrecoverable failure while advancing in time (Newton failure in fixed
/// mode, adaptive controller stuck at dt_min, or a bounds-invariant
/// violation after an accepted step).
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& msg, long step, double dt)
        : std::runtime_error(msg), step(step), dt(dt) {}
    long step;
    double dt;
};

/// Raised by linear_solve on a singular pivot or an unverifiable solution.
class LinearSolveBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Direct sparse solve of A x = b with a verified residual:
/// ||Ax - b||_inf <= 1e-12 (1 + ||b||_inf), tightened by iterative
/// refinement if needed. Throws LinearSolveBreakdown otherwise.
std::vector<double> linear_solve(const Eigen::SparseMatrix<double>& A,
                                 std::span<const double> b);

/// Largest damping factor of the form 2^{-j}, j <= 30, keeping
/// M + lambda dM inside [0, 1-1e-14] componentwise. Newton directions that
/// would cross 0 by no more than a roundoff-level amount
/// (1e-14 (1 + ||dM||_inf)) are snapped to land exactly on 0 first.
/// Returns 0 when no admissible factor exists (step failure).
double damp_into_domain(std::span<const double> M, std::span<double> dM);

/// One implicit Euler step solved by damped Newton, started from prev
/// (or from initial_guess when given). Returns converged=false instead of
/// throwing on Newton/linear-solver failure. Iterates are kept inside
/// M in [0, 1-1e-14]; S is never constrained.
std::pair<State, NewtonReport> newton_solve(const Mesh& mesh, const Nonlinearity& nl,
                                            const State& prev, double dt,
                                            const TimeControls& controls,
                                            const State* initial_guess = nullptr);

using StepCallback =
    std::function<void(const State&, const NewtonReport&, const DiagnosticsRecord&)>;

/// Exactly n_steps implicit Euler steps of size dt; Newton failure is a hard
/// error (SolveError with the step index). After every accepted step the
/// bounds 0 <= S <= 1+1e-12, 0 <= M < 1 are asserted.
void advance_fixed(const Mesh& mesh, const Nonlinearity& nl, State& state, double dt,
                   long n_steps, const TimeControls& controls,
                   const StepCallback& on_step = nullptr);

/// Advance to t_end with the adaptive policy; optional stop_points are times
/// the stepper lands on exactly (snapshots). Failure at dt_min raises
/// SolveError with the full report.
void advance_adaptive(const Mesh& mesh, const Nonlinearity& nl, State& state,
                      const TimeControls& controls, double t_end,
                      const StepCallback& on_step = nullptr,
                      std::span<const double> stop_points = {});

}  // namespace biofv

#endif
