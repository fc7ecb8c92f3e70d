#ifndef BIOFV_SCHEME_HPP
#define BIOFV_SCHEME_HPP

#include "biofv/mesh.hpp"
#include "biofv/model.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace biofv {

/// Discrete fields at one time level.
struct State {
    std::vector<double> S;
    std::vector<double> M;
    double t = 0.0;
    long k = 0;
};

/// Defect of the implicit Euler system at a candidate state.
struct Residual {
    std::vector<double> rS;
    std::vector<double> rM;
    double max_norm() const;
};

using ScalarField = std::function<double(double, double)>;

/// Cell averages of the initial data, by midpoint quadrature on 64
/// subintervals per cell (1D) or a degree-2 rule on 16 uniform sub-triangles
/// (2D). Averages outside [0,1] (S) or [0,1) (M) beyond 1e-12 raise
/// std::domain_error.
State project_initial_data(const Mesh& mesh, const ScalarField& S0, const ScalarField& M0);

/// F_{S,K,sigma} = -tau_sigma d1 (S_{K,sigma} - S_K), oriented out of the
/// edge's canonical cell K; boundary values indexed by bnd_index.
double flux_S(const Mesh& mesh, const Nonlinearity& nl, std::span<const double> S_cells,
              std::span<const double> S_boundary, int edge);

/// F_{M,K,sigma} = -tau_sigma d2 (F(M_{K,sigma}) - F(M_K)).
double flux_M(const Mesh& mesh, const Nonlinearity& nl, std::span<const double> M_cells,
              std::span<const double> M_boundary, int edge);

/// Residual of the implicit Euler TPFA system with Dirichlet ghosts
/// S_sigma = 1, M_sigma = MD:
///   r_S(K) = m(K)/dt (S_K - S_K^prev) + sum_sigma F_{S,K,sigma} - m(K) g(S_K, M_K)
/// and analogously for r_M with F_M and h.
Residual assemble_residual(const Mesh& mesh, const Nonlinearity& nl, const State& prev,
                           const State& candidate, double dt);

/// Exact Jacobian of assemble_residual with respect to the candidate, in the
/// interleaved unknown ordering (S_0, M_0, S_1, M_1, ...).
Eigen::SparseMatrix<double> assemble_jacobian(const Mesh& mesh, const Nonlinearity& nl,
                                              const State& candidate, double dt);

/// Both sides of the discrete integration-by-parts identity
///   sum_K sum_{sigma in E_K} F_{K,sigma} v_K
///     = -sum_sigma F_{K,sigma} D_{K,sigma} v + sum_{sigma ext} F_{K,sigma} v_sigma
/// for an antisymmetric flux family given per edge (canonical K side).
std::pair<double, double> discrete_ibp_check(const Mesh& mesh,
                                             std::span<const double> edge_fluxes,
                                             std::span<const double> cell_values,
                                             std::span<const double> boundary_values);

}  // namespace biofv

#endif
