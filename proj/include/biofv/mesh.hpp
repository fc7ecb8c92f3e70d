#ifndef BIOFV_MESH_HPP
#define BIOFV_MESH_HPP

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace biofv {

/// Raised when a mesh violates the TPFA admissibility requirements
/// (orthogonality, cell points inside cells, positive distances).
class InadmissibleMeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Cell {
    double measure = 0.0;                    ///< m(K)
    std::array<double, 2> center{0.0, 0.0};  ///< x_K (y component 0 in 1D)
};

enum class EdgeKind { Interior, Boundary };

/// An oriented mesh edge. Interior edges connect cells K and L; quantities
/// that depend on a side (normal, distances) are stored for the canonical
/// side K, the L side follows by sign flip / d_L.
struct Edge {
    EdgeKind kind = EdgeKind::Boundary;
    int K = -1;
    int L = -1;                ///< -1 for boundary edges
    int bnd_index = -1;        ///< position among boundary edges, -1 if interior
    double measure = 0.0;      ///< m(sigma); equals 1 in 1D by convention
    double d_sigma = 0.0;      ///< d(x_K,x_L) interior, d(x_K,sigma) boundary
    double tau = 0.0;          ///< m(sigma)/d_sigma
    double d_K = 0.0;          ///< d(x_K, sigma)
    double d_L = 0.0;          ///< d(x_L, sigma), interior only
    std::array<double, 2> normal{0.0, 0.0};  ///< unit normal out of K
    /// m(T_{K,sigma}): full diamond for interior edges, half-diamond for
    /// boundary edges. In 1D the diamond of an interior edge is the segment
    /// [x_K,x_L], so m(sigma) d(x_K,x_L) = dim * m(T) with dim = 1.
    double dual_measure = 0.0;
};

/// Result of validate_admissibility(); pure observations, the caller decides
/// pass/fail.
struct AdmissibilityReport {
    double xi_observed = 0.0;            ///< min over K, sigma of d(x_K,sigma)/d_sigma
    double estmesh_lhs = 0.0;            ///< sum_K sum_sigma m(sigma) d(x_K,sigma)
    double estmesh_rhs = 0.0;            ///< 2 m(Omega)
    double orthogonality_max_violation = 0.0;
    double diamond_identity_max_rel = 0.0;  ///< max rel defect of m(sigma) d = dim m(T)
    double dual_partition_rel_defect = 0.0; ///< |sum m(T) - m(Omega)| / m(Omega)
    double total_measure = 0.0;
};

/// TPFA-admissible mesh in 1D (intervals) or 2D (acute triangles with
/// circumcenter cell points). Immutable after construction; safe for
/// concurrent reads.
class Mesh {
public:
    int dim() const { return dim_; }
    int n_cells() const { return static_cast<int>(cells_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    int n_boundary_edges() const { return static_cast<int>(boundary_edges_.size()); }

    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<Edge>& edges() const { return edges_; }
    /// E_K: ids of the edges of cell K.
    const std::vector<std::vector<int>>& cell_edges() const { return cell_edges_; }
    /// Edge ids of the boundary edges, indexed by Edge::bnd_index.
    const std::vector<int>& boundary_edges() const { return boundary_edges_; }

    double total_measure() const { return total_measure_; }
    double xi() const { return xi_; }
    double max_diameter() const { return max_diameter_; }

    /// 1D only: the interval [lo,hi] covered by cell i.
    std::array<double, 2> cell_interval(int i) const;
    /// 2D only: the vertex coordinates of triangle i.
    std::array<std::array<double, 2>, 3> triangle_vertices(int i) const;

    /// 2D source geometry (empty in 1D); kept for file round-trips.
    const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& triangles() const { return tris_; }

private:
    friend Mesh build_interval_mesh(int, double, double);
    friend Mesh build_triangular_mesh(const std::vector<std::array<double, 2>>&,
                                      const std::vector<std::array<int, 3>>&);

    int dim_ = 0;
    std::vector<Cell> cells_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> cell_edges_;
    std::vector<int> boundary_edges_;
    std::vector<std::array<double, 2>> nodes_;
    std::vector<std::array<int, 3>> tris_;
    double total_measure_ = 0.0;
    double xi_ = 0.0;
    double max_diameter_ = 0.0;
};

/// Uniform 1D mesh of [x0,x1]. Edges are points with m(sigma) = 1, so
/// tau = 1/d_sigma and the scheme reduces to the standard 1D FV scheme.
Mesh build_interval_mesh(int n_cells, double x0, double x1);

/// Mesh from a triangulation; cell points are circumcenters, which realize
/// the orthogonality condition. Triangles with a right or obtuse angle make
/// the mesh inadmissible and raise InadmissibleMeshError naming the triangle.
Mesh build_triangular_mesh(const std::vector<std::array<double, 2>>& nodes,
                           const std::vector<std::array<int, 3>>& triangles);

AdmissibilityReport validate_admissibility(const Mesh& mesh);

/// |v|_{1,2,M} = sqrt(sum_sigma tau_sigma (D_sigma v)^2), with v given per
/// cell and per boundary edge (indexed by bnd_index).
double discrete_seminorm_h1(const Mesh& mesh, std::span<const double> cell_values,
                            std::span<const double> boundary_values);

/// ||v||_{0,p,M} = (sum_K m(K) |v_K|^p)^{1/p} for p in {1,2}.
double discrete_norm_lp(const Mesh& mesh, std::span<const double> cell_values, int p);

/// ||v||_{1,2,M} = (||v||_{0,2,M}^2 + |v|_{1,2,M}^2)^{1/2}.
double discrete_norm_h1(const Mesh& mesh, std::span<const double> cell_values,
                        std::span<const double> boundary_values);

/// Approximate gradient on the dual mesh: per edge, the constant vector
/// (m(sigma)/m(T_{K,sigma})) D_{K,sigma} v nu_{K,sigma}.
std::vector<std::array<double, 2>> dual_gradient(const Mesh& mesh,
                                                 std::span<const double> cell_values,
                                                 std::span<const double> boundary_values);

/// Plain-text triangulation format: a NODES section of "index x y" lines
/// followed by a TRIANGLES section of "index i j k" lines.
struct TriMeshData {
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> triangles;
};

TriMeshData read_mesh_file(const std::string& path);
void write_mesh_file(const TriMeshData& data, const std::string& path);

/// Structured acute triangulation of the unit square with 2*nx*ny triangles:
/// near-equilateral offset rows in the interior and wedge triangles along the
/// vertical boundaries. Requires ny even and an aspect ratio
/// rho = ny/nx strictly inside (1,2); every triangle is strictly acute.
TriMeshData generate_acute_square_mesh(int nx, int ny);

}  // namespace biofv

#endif
