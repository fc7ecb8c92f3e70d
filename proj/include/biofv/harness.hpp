#ifndef BIOFV_HARNESS_HPP
#define BIOFV_HARNESS_HPP

#include "biofv/diagnostics.hpp"
#include "biofv/mesh.hpp"
#include "biofv/model.hpp"
#include "biofv/scheme.hpp"
#include "biofv/solver.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace biofv {

/// kappa* = kappa2 kappa4 / (kappa3 - kappa2): h(S,M) > 0 for M > 0 exactly
/// when S > kappa*. Empty when kappa3 <= kappa2 (h is never positive).
std::optional<double> kappa_star(const ModelParams& params);

/// Number of edge-connected components of the flagged cells.
int connected_components(const Mesh& mesh, std::span<const char> flags);

/// L1 distance between a coarse field and the cellwise averages of a finer
/// field, for uniform 1D meshes whose cell counts divide.
double l1_error_vs_reference(const Mesh& coarse, std::span<const double> coarse_field,
                             const Mesh& fine, std::span<const double> fine_field);

struct ConvergenceRow {
    int n_cells = 0;
    double h = 0.0;
    double err_S = 0.0;
    double err_M = 0.0;
    double sum_dt_F_h1_sq = 0.0;  ///< sum_k dt ||F(M^k)||_{1,2,M}^2 over the run
    double sum_dt_S_h1_sq = 0.0;  ///< sum_k dt ||S^k||_{1,2,M}^2 over the run
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  ///< h strictly decreasing
    double slope_S = 0.0;              ///< least-squares fit on log-log data
    double slope_M = 0.0;
    int reference_n = 0;
};

/// Least-squares slope of log(err) against log(h).
double fit_loglog_slope(std::span<const double> h, std::span<const double> err);

/// Initial data of the 1D convergence experiment:
/// S0(x) = 1 - 0.2 sin(pi x), M0(x) = 0.2 g(x-0.38) + 0.9 g(x-0.62) with
/// g(x) = max(1 - 81 x^2, 0), and the parameter set of the 1D test case.
struct Test1Data {
    ModelParams params;  ///< d1=4.1667, d2=4.2, kappas, (a,b)=(2,1), MD=0
    ScalarField S0;
    ScalarField M0;
};
Test1Data test1_data();

struct ConvergenceConfig {
    std::vector<int> grids{40, 80, 160, 320};
    int reference_n = 2560;
    double dt = 1e-7;
    double t_end = 1e-3;
    /// Residual tolerance for the study solves. The default is looser than
    /// the solver-wide 1e-10 because the residual max-norm carries an
    /// m(K)/dt scale whose floating-point floor exceeds 1e-10 on the
    /// reference grid.
    double newton_tol = 1e-9;
    int newton_max_iter = 50;
};

/// Fixed-step solves on each grid and on the reference grid, L1 errors at
/// t_end against the averaged reference, and fitted slopes. A solve failure
/// aborts the study naming the offending grid.
ConvergenceTable run_convergence_study(const ConvergenceConfig& config);

/// Initial data of the 2D microbial-floc experiment:
/// S0 = 1, M0 = 0.3 p(x-0.4, y-0.5) + 0.9 p(x-0.6, y-0.5) with
/// p(x,y) = max(1 - c (x^2 + y^2), 0), and the parameter set with (a,b)=(4,4).
///
/// The bump sharpness c defaults to 196 (support radius 1/14) so that the
/// two colonies start as separated sets; with the radius-1/8 bumps the two
/// supports overlap from the start and there is nothing to merge.
struct Test2Data {
    ModelParams params;
    ScalarField S0;
    ScalarField M0;
};
Test2Data test2_data(double bump_sharpness = 196.0);

struct FlocConfig {
    int nx = 36;
    int ny = 50;  ///< 2*nx*ny = 3600 triangles
    double t_end = 0.1;
    std::vector<double> snapshot_times{1e-4, 1e-2, 0.1};
    double merge_threshold = 1e-3;
    double bump_sharpness = 196.0;
    TimeControls controls;  ///< defaults set by floc_controls()
};
TimeControls floc_controls();

struct FlocSnapshot {
    double t = 0.0;
    State state;
};

struct FlocResult {
    std::vector<FlocSnapshot> snapshots;
    std::vector<DiagnosticsRecord> diagnostics;
    int initial_components = 0;
    std::optional<double> merge_time;      ///< first t with one component
    double initial_support_measure = 0.0;  ///< measure of {M > threshold} at t=0
    double final_support_measure = 0.0;
    double max_support_drop = 0.0;  ///< largest step-to-step decrease of the support
    double max_cell_measure = 0.0;
};

/// The 2D experiment on the generated acute triangulation, with adaptive
/// stepping; tracks colony merging and the growth of {M > threshold}.
FlocResult run_floc_experiment(const FlocConfig& config, const Mesh& mesh);

struct MonitorOptions {
    std::optional<double> m0;          ///< provide only if M0 >= m0 and MD >= m0
    double threshold = 1e-3;           ///< support indicator threshold
    double lower_bound_slack = 1e-10;  ///< slack on the positivity bound
};

struct MonitorReport {
    bool bounds_ok = true;
    bool lower_bound_ok = true;     ///< M_K^k >= m0 prod_j (1+kappa2 dt_j)^{-1} - slack
    bool z_affine_ok = true;        ///< ||Z(M^k)|| <= ||Z(M^0)|| + C t_k along the run
    double z_affine_C = 0.0;        ///< affine constant fitted on the first half
    double sum_dt_F_h1_sq = 0.0;
    double sum_dt_S_h1_sq = 0.0;
    long steps_observed = 0;
    std::string first_violation;  ///< empty when everything passed
};

/// Streaming invariant monitor: feed the initial state with dt = 0, then
/// every accepted state with its step size.
class InvariantMonitor {
public:
    InvariantMonitor(const Mesh& mesh, const Nonlinearity& nl, MonitorOptions options);
    void observe(const State& state, double dt);
    MonitorReport report() const;

private:
    const Mesh& mesh_;
    const Nonlinearity& nl_;
    MonitorOptions opt_;
    MonitorReport partial_;
    double lower_bound_ = 0.0;
    std::vector<std::pair<double, double>> z_history_;  // (t, ||Z||)
    bool has_initial_ = false;
};

}  // namespace biofv

#endif
