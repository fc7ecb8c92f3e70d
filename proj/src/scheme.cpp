#include "biofv/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace biofv {

double Residual::max_norm() const {
    double m = 0.0;
    for (double v : rS) m = std::max(m, std::abs(v));
    for (double v : rM) m = std::max(m, std::abs(v));
    return m;
}

namespace {

void check_sizes(const Mesh& mesh, std::span<const double> cells,
                 std::span<const double> boundary, const char* who) {
    if (static_cast<int>(cells.size()) != mesh.n_cells())
        throw std::invalid_argument(std::string(who) + ": cell value count mismatch");
    if (static_cast<int>(boundary.size()) != mesh.n_boundary_edges())
        throw std::invalid_argument(std::string(who) + ": boundary value count mismatch");
}

double cell_average_1d(const Mesh& mesh, int cell, const ScalarField& fn) {
    const auto [lo, hi] = mesh.cell_interval(cell);
    const double h = (hi - lo) / 64.0;
    double s = 0.0;
    for (int i = 0; i < 64; ++i) s += fn(lo + (i + 0.5) * h, 0.0);
    return s / 64.0;
}

double cell_average_2d(const Mesh& mesh, int cell, const ScalarField& fn) {
    // two uniform 4-splits of the triangle, degree-2 edge-midpoint rule on
    // each of the 16 sub-triangles
    const auto v = mesh.triangle_vertices(cell);
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j + i < 4; ++j) {
            // sub-triangle lattice: corners at barycentric (i,j)/4 steps
            auto pt = [&](double bi, double bj) -> std::array<double, 2> {
                const double b0 = 1.0 - bi - bj;
                return {b0 * v[0][0] + bi * v[1][0] + bj * v[2][0],
                        b0 * v[0][1] + bi * v[1][1] + bj * v[2][1]};
            };
            auto accumulate = [&](std::array<double, 2> A, std::array<double, 2> B,
                                  std::array<double, 2> C) {
                s += fn(0.5 * (A[0] + B[0]), 0.5 * (A[1] + B[1]));
                s += fn(0.5 * (B[0] + C[0]), 0.5 * (B[1] + C[1]));
                s += fn(0.5 * (C[0] + A[0]), 0.5 * (C[1] + A[1]));
            };
            const double q = 0.25;
            accumulate(pt(i * q, j * q), pt((i + 1) * q, j * q), pt(i * q, (j + 1) * q));
            if (i + j < 3)  // inverted sub-triangle
                accumulate(pt((i + 1) * q, j * q), pt((i + 1) * q, (j + 1) * q),
                           pt(i * q, (j + 1) * q));
        }
    return s / (16.0 * 3.0);
}

}  // namespace

State project_initial_data(const Mesh& mesh, const ScalarField& S0, const ScalarField& M0) {
    State st;
    st.S.resize(mesh.n_cells());
    st.M.resize(mesh.n_cells());
    for (int K = 0; K < mesh.n_cells(); ++K) {
        const double s = (mesh.dim() == 1) ? cell_average_1d(mesh, K, S0)
                                           : cell_average_2d(mesh, K, S0);
        const double m = (mesh.dim() == 1) ? cell_average_1d(mesh, K, M0)
                                           : cell_average_2d(mesh, K, M0);
        if (s < -1e-12 || s > 1.0 + 1e-12)
            throw std::domain_error("project_initial_data: S average " + std::to_string(s) +
                                    " outside [0,1] in cell " + std::to_string(K));
        if (m < -1e-12 || m >= 1.0)
            throw std::domain_error("project_initial_data: M average " + std::to_string(m) +
                                    " outside [0,1) in cell " + std::to_string(K));
        st.S[K] = std::clamp(s, 0.0, 1.0);
        st.M[K] = std::max(m, 0.0);
    }
    return st;
}

double flux_S(const Mesh& mesh, const Nonlinearity& nl, std::span<const double> S_cells,
              std::span<const double> S_boundary, int edge) {
    check_sizes(mesh, S_cells, S_boundary, "flux_S");
    const Edge& e = mesh.edges().at(edge);
    const double vKs = (e.kind == EdgeKind::Interior) ? S_cells[e.L] : S_boundary[e.bnd_index];
    return -e.tau * nl.params().d1 * (vKs - S_cells[e.K]);
}

double flux_M(const Mesh& mesh, const Nonlinearity& nl, std::span<const double> M_cells,
              std::span<const double> M_boundary, int edge) {
    check_sizes(mesh, M_cells, M_boundary, "flux_M");
    const Edge& e = mesh.edges().at(edge);
    const double FKs = nl.F((e.kind == EdgeKind::Interior) ? M_cells[e.L]
                                                           : M_boundary[e.bnd_index]);
    return -e.tau * nl.params().d2 * (FKs - nl.F(M_cells[e.K]));
}

Residual assemble_residual(const Mesh& mesh, const Nonlinearity& nl, const State& prev,
                           const State& candidate, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("assemble_residual: dt must be positive");
    const int n = mesh.n_cells();
    if (static_cast<int>(candidate.S.size()) != n || static_cast<int>(prev.S.size()) != n)
        throw std::invalid_argument("assemble_residual: state size mismatch");

    const double d1 = nl.params().d1, d2 = nl.params().d2;
    const double F_D = nl.F(nl.params().MD);

    Residual r;
    r.rS.resize(n);
    r.rM.resize(n);
    std::vector<double> FM(n);
    for (int K = 0; K < n; ++K) {
        FM[K] = nl.F(candidate.M[K]);
        const double mK = mesh.cells()[K].measure;
        r.rS[K] = mK / dt * (candidate.S[K] - prev.S[K]) -
                  mK * nl.g(candidate.S[K], candidate.M[K]);
        r.rM[K] = mK / dt * (candidate.M[K] - prev.M[K]) -
                  mK * nl.h(candidate.S[K], candidate.M[K]);
    }
    for (const Edge& e : mesh.edges()) {
        if (e.kind == EdgeKind::Interior) {
            const double fS = -e.tau * d1 * (candidate.S[e.L] - candidate.S[e.K]);
            const double fM = -e.tau * d2 * (FM[e.L] - FM[e.K]);
            r.rS[e.K] += fS;
            r.rS[e.L] -= fS;
            r.rM[e.K] += fM;
            r.rM[e.L] -= fM;
        } else {
            r.rS[e.K] += -e.tau * d1 * (ModelParams::SD - candidate.S[e.K]);
            r.rM[e.K] += -e.tau * d2 * (F_D - FM[e.K]);
        }
    }
    return r;
}

Eigen::SparseMatrix<double> assemble_jacobian(const Mesh& mesh, const Nonlinearity& nl,
                                              const State& candidate, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("assemble_jacobian: dt must be positive");
    const int n = mesh.n_cells();
    const double d1 = nl.params().d1, d2 = nl.params().d2;

    std::vector<double> fM(n), diagS(n), diagM(n);
    for (int K = 0; K < n; ++K) {
        fM[K] = nl.f(candidate.M[K]);
        const double mK = mesh.cells()[K].measure;
        diagS[K] = mK / dt - mK * nl.dg_dS(candidate.S[K], candidate.M[K]);
        diagM[K] = mK / dt - mK * nl.dh_dM(candidate.S[K], candidate.M[K]);
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * n + 4 * mesh.n_edges());
    for (const Edge& e : mesh.edges()) {
        const double tS = e.tau * d1;
        diagS[e.K] += tS;
        diagM[e.K] += e.tau * d2 * fM[e.K];
        if (e.kind == EdgeKind::Interior) {
            diagS[e.L] += tS;
            diagM[e.L] += e.tau * d2 * fM[e.L];
            trip.emplace_back(2 * e.K, 2 * e.L, -tS);
            trip.emplace_back(2 * e.L, 2 * e.K, -tS);
            trip.emplace_back(2 * e.K + 1, 2 * e.L + 1, -e.tau * d2 * fM[e.L]);
            trip.emplace_back(2 * e.L + 1, 2 * e.K + 1, -e.tau * d2 * fM[e.K]);
        }
    }
    for (int K = 0; K < n; ++K) {
        const double mK = mesh.cells()[K].measure;
        trip.emplace_back(2 * K, 2 * K, diagS[K]);
        trip.emplace_back(2 * K, 2 * K + 1, -mK * nl.dg_dM(candidate.S[K], candidate.M[K]));
        trip.emplace_back(2 * K + 1, 2 * K, -mK * nl.dh_dS(candidate.S[K], candidate.M[K]));
        trip.emplace_back(2 * K + 1, 2 * K + 1, diagM[K]);
    }

    Eigen::SparseMatrix<double> J(2 * n, 2 * n);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

std::pair<double, double> discrete_ibp_check(const Mesh& mesh,
                                             std::span<const double> edge_fluxes,
                                             std::span<const double> cell_values,
                                             std::span<const double> boundary_values) {
    check_sizes(mesh, cell_values, boundary_values, "discrete_ibp_check");
    if (static_cast<int>(edge_fluxes.size()) != mesh.n_edges())
        throw std::invalid_argument("discrete_ibp_check: edge flux count mismatch");
    // left side: per-cell sum over its edges, with F_{L,sigma} = -F_{K,sigma}
    double lhs = 0.0;
    for (int K = 0; K < mesh.n_cells(); ++K)
        for (int i : mesh.cell_edges()[K]) {
            const Edge& e = mesh.edges()[i];
            const double fKs = (e.K == K) ? edge_fluxes[i] : -edge_fluxes[i];
            lhs += fKs * cell_values[K];
        }
    // right side: per-edge sum
    double rhs = 0.0;
    for (int i = 0; i < mesh.n_edges(); ++i) {
        const Edge& e = mesh.edges()[i];
        const double vKs = (e.kind == EdgeKind::Interior) ? cell_values[e.L]
                                                          : boundary_values[e.bnd_index];
        rhs -= edge_fluxes[i] * (vKs - cell_values[e.K]);
        if (e.kind == EdgeKind::Boundary) rhs += edge_fluxes[i] * boundary_values[e.bnd_index];
    }
    return {lhs, rhs};
}

}  // namespace biofv
