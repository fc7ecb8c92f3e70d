#include "biofv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace biofv {

namespace {

using Vec2 = std::array<double, 2>;

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

Vec2 circumcenter(const Vec2& A, const Vec2& B, const Vec2& C) {
    const double d = 2.0 * ((A[0] - C[0]) * (B[1] - C[1]) - (B[0] - C[0]) * (A[1] - C[1]));
    const double a2 = dot(sub(A, C), sub(A, C));
    const double b2 = dot(sub(B, C), sub(B, C));
    const double ux = (a2 * (B[1] - C[1]) - b2 * (A[1] - C[1])) / d;
    const double uy = (b2 * (A[0] - C[0]) - a2 * (B[0] - C[0])) / d;
    return {C[0] + ux, C[1] + uy};
}

double polygon_area(std::span<const Vec2> pts) {
    double s = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % pts.size()];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * std::abs(s);
}

}  // namespace

std::array<double, 2> Mesh::cell_interval(int i) const {
    if (dim_ != 1) throw std::logic_error("cell_interval: 1D meshes only");
    const Cell& c = cells_.at(i);
    return {c.center[0] - 0.5 * c.measure, c.center[0] + 0.5 * c.measure};
}

std::array<std::array<double, 2>, 3> Mesh::triangle_vertices(int i) const {
    if (dim_ != 2) throw std::logic_error("triangle_vertices: 2D meshes only");
    const auto& t = tris_.at(i);
    return {nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]};
}

Mesh build_interval_mesh(int n_cells, double x0, double x1) {
    if (n_cells < 1)
        throw std::invalid_argument("build_interval_mesh: n_cells must be >= 1");
    if (!(x1 > x0))
        throw std::invalid_argument("build_interval_mesh: empty interval");

    Mesh m;
    m.dim_ = 1;
    const double h = (x1 - x0) / n_cells;
    m.cells_.resize(n_cells);
    m.cell_edges_.resize(n_cells);
    for (int i = 0; i < n_cells; ++i) {
        m.cells_[i].measure = h;
        m.cells_[i].center = {x0 + (i + 0.5) * h, 0.0};
    }
    // edges in geometric order: n_cells+1 points
    for (int i = 0; i <= n_cells; ++i) {
        Edge e;
        e.measure = 1.0;
        if (i == 0 || i == n_cells) {
            e.kind = EdgeKind::Boundary;
            e.K = (i == 0) ? 0 : n_cells - 1;
            e.d_sigma = e.d_K = 0.5 * h;
            e.normal = {(i == 0) ? -1.0 : 1.0, 0.0};
            e.bnd_index = static_cast<int>(m.boundary_edges_.size());
            m.boundary_edges_.push_back(i);
            e.dual_measure = 0.5 * h;  // half-diamond [x_K, boundary]
        } else {
            e.kind = EdgeKind::Interior;
            e.K = i - 1;
            e.L = i;
            e.d_sigma = h;
            e.d_K = e.d_L = 0.5 * h;
            e.normal = {1.0, 0.0};
            e.dual_measure = h;  // full diamond [x_K, x_L]
        }
        e.tau = e.measure / e.d_sigma;
        m.edges_.push_back(e);
        m.cell_edges_[e.K].push_back(i);
        if (e.L >= 0) m.cell_edges_[e.L].push_back(i);
    }
    m.total_measure_ = x1 - x0;
    m.max_diameter_ = h;
    m.xi_ = 0.5;  // interior edges: d(x_K,sigma)/d_sigma = (h/2)/h
    if (n_cells == 1) m.xi_ = 1.0;
    return m;
}

Mesh build_triangular_mesh(const std::vector<std::array<double, 2>>& nodes,
                           const std::vector<std::array<int, 3>>& triangles) {
    if (nodes.size() < 3 || triangles.empty())
        throw std::invalid_argument("build_triangular_mesh: need nodes and triangles");

    const int n_tri = static_cast<int>(triangles.size());
    Mesh m;
    m.dim_ = 2;
    m.nodes_ = nodes;
    m.tris_ = triangles;
    m.cells_.resize(n_tri);
    m.cell_edges_.resize(n_tri);

    for (int t = 0; t < n_tri; ++t) {
        auto& tri = m.tris_[t];
        for (int v : tri)
            if (v < 0 || v >= static_cast<int>(nodes.size()))
                throw std::invalid_argument("triangle " + std::to_string(t) +
                                            " references node " + std::to_string(v) +
                                            " out of range");
        const Vec2 &A = nodes[tri[0]], &B = nodes[tri[1]], &C = nodes[tri[2]];
        const double twice_area = cross(sub(B, A), sub(C, A));
        if (std::abs(twice_area) < 1e-300)
            throw std::invalid_argument("triangle " + std::to_string(t) + " is degenerate");
        if (twice_area < 0.0) std::swap(tri[1], tri[2]);  // normalize to CCW
        m.cells_[t].measure = 0.5 * std::abs(twice_area);
        m.cells_[t].center = circumcenter(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
        m.total_measure_ += m.cells_[t].measure;
        m.max_diameter_ = std::max({m.max_diameter_, norm(sub(B, A)), norm(sub(C, B)),
                                    norm(sub(A, C))});
    }

    // collect edges; an edge is identified by its sorted node pair, and the
    // node order (p,q) is stored as it appears in the CCW boundary of cell K
    std::map<std::pair<int, int>, int> edge_of;
    struct Side { int p, q; };
    std::vector<Side> edge_side;
    double xi = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_tri; ++t) {
        const auto& tri = m.tris_[t];
        for (int s = 0; s < 3; ++s) {
            const int p = tri[s], q = tri[(s + 1) % 3];
            const auto key = std::minmax(p, q);
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                Edge e;
                e.K = t;
                e.measure = norm(sub(nodes[q], nodes[p]));
                edge_of.emplace(key, static_cast<int>(m.edges_.size()));
                m.edges_.push_back(e);
                edge_side.push_back({p, q});
                m.cell_edges_[t].push_back(static_cast<int>(m.edges_.size()) - 1);
            } else {
                Edge& e = m.edges_[it->second];
                if (e.L >= 0)
                    throw std::invalid_argument("edge shared by more than two triangles near node " +
                                                std::to_string(p));
                e.L = t;
                e.kind = EdgeKind::Interior;
                m.cell_edges_[t].push_back(it->second);
            }
        }
    }

    for (size_t i = 0; i < m.edges_.size(); ++i) {
        Edge& e = m.edges_[i];
        const Vec2& P = nodes[edge_side[i].p];
        const Vec2& Q = nodes[edge_side[i].q];
        const Vec2 t_hat = {(Q[0] - P[0]) / e.measure, (Q[1] - P[1]) / e.measure};

        auto signed_inward_distance = [&](int cell) {
            // positive when the circumcenter lies strictly on the cell's side
            const Vec2& xK = m.cells_[cell].center;
            double s = cross(sub(Q, P), sub(xK, P)) / e.measure;
            // the CCW triangle lies left of side (p,q) as stored for K; for L
            // the same side has opposite orientation
            return s;
        };

        const double diam_scale = e.measure;
        double dK = signed_inward_distance(e.K);
        if (e.kind == EdgeKind::Interior) {
            double dL = -signed_inward_distance(e.L);
            if (dK <= 1e-12 * diam_scale || dL <= 1e-12 * diam_scale)
                throw InadmissibleMeshError(
                    "triangle " + std::to_string(dK <= 1e-12 * diam_scale ? e.K : e.L) +
                    " has a right or obtuse angle (circumcenter distance " +
                    std::to_string(std::min(dK, dL)) + " to a shared edge)");
            e.d_K = dK;
            e.d_L = dL;
            const Vec2 seg = sub(m.cells_[e.L].center, m.cells_[e.K].center);
            e.d_sigma = norm(seg);
            if (e.d_sigma <= 1e-12 * diam_scale)
                throw InadmissibleMeshError("cells " + std::to_string(e.K) + " and " +
                                            std::to_string(e.L) +
                                            " have coinciding circumcenters");
            const double ortho = std::abs(dot(seg, t_hat)) / e.d_sigma;
            if (ortho > 1e-10)
                throw InadmissibleMeshError("edge between triangles " + std::to_string(e.K) +
                                            " and " + std::to_string(e.L) +
                                            " violates orthogonality (cos = " +
                                            std::to_string(ortho) + ")");
            const Vec2 diamond[4] = {m.cells_[e.K].center, P, m.cells_[e.L].center, Q};
            e.dual_measure = polygon_area(diamond);
        } else {
            if (dK <= 1e-12 * diam_scale)
                throw InadmissibleMeshError("triangle " + std::to_string(e.K) +
                                            " has a right or obtuse angle (circumcenter "
                                            "distance " + std::to_string(dK) +
                                            " to a boundary edge)");
            e.d_K = dK;
            e.d_sigma = dK;
            const Vec2 half[3] = {m.cells_[e.K].center, P, Q};
            e.dual_measure = polygon_area(half);
            e.bnd_index = static_cast<int>(m.boundary_edges_.size());
            m.boundary_edges_.push_back(static_cast<int>(i));
        }
        e.tau = e.measure / e.d_sigma;
        // outward normal from K: the side (p,q) is CCW for K, so the outward
        // direction is t_hat rotated by -90 degrees
        e.normal = {t_hat[1], -t_hat[0]};
        xi = std::min(xi, e.d_K / e.d_sigma);
        if (e.kind == EdgeKind::Interior) xi = std::min(xi, e.d_L / e.d_sigma);
    }
    m.xi_ = xi;
    return m;
}

AdmissibilityReport validate_admissibility(const Mesh& mesh) {
    AdmissibilityReport r;
    r.total_measure = mesh.total_measure();
    r.estmesh_rhs = 2.0 * mesh.total_measure();
    r.xi_observed = std::numeric_limits<double>::infinity();

    double dual_total = 0.0;
    for (const Edge& e : mesh.edges()) {
        r.xi_observed = std::min(r.xi_observed, e.d_K / e.d_sigma);
        r.estmesh_lhs += e.measure * e.d_K;
        dual_total += e.dual_measure;
        if (e.kind == EdgeKind::Interior) {
            r.xi_observed = std::min(r.xi_observed, e.d_L / e.d_sigma);
            r.estmesh_lhs += e.measure * e.d_L;
            const double lhs = e.measure * e.d_sigma;
            const double rhs = mesh.dim() * e.dual_measure;
            r.diamond_identity_max_rel =
                std::max(r.diamond_identity_max_rel, std::abs(lhs - rhs) / std::max(lhs, rhs));
            // orthogonality defect: cosine between x_K x_L and the edge tangent
            const Cell& K = mesh.cells()[e.K];
            const Cell& L = mesh.cells()[e.L];
            const Vec2 seg = sub(L.center, K.center);
            if (mesh.dim() == 2) {
                const double along = std::abs(cross(seg, e.normal)) / norm(seg);
                r.orthogonality_max_violation = std::max(r.orthogonality_max_violation, along);
            }
        }
    }
    r.dual_partition_rel_defect =
        std::abs(dual_total - mesh.total_measure()) / mesh.total_measure();
    return r;
}

double discrete_seminorm_h1(const Mesh& mesh, std::span<const double> cell_values,
                            std::span<const double> boundary_values) {
    if (static_cast<int>(cell_values.size()) != mesh.n_cells())
        throw std::invalid_argument("discrete_seminorm_h1: cell value count mismatch");
    if (static_cast<int>(boundary_values.size()) != mesh.n_boundary_edges())
        throw std::invalid_argument("discrete_seminorm_h1: boundary value count mismatch");
    double s = 0.0;
    for (const Edge& e : mesh.edges()) {
        const double vK = cell_values[e.K];
        const double vKs = (e.kind == EdgeKind::Interior) ? cell_values[e.L]
                                                          : boundary_values[e.bnd_index];
        const double d = vKs - vK;
        s += e.tau * d * d;
    }
    return std::sqrt(s);
}

double discrete_norm_lp(const Mesh& mesh, std::span<const double> cell_values, int p) {
    if (static_cast<int>(cell_values.size()) != mesh.n_cells())
        throw std::invalid_argument("discrete_norm_lp: cell value count mismatch");
    if (p != 1 && p != 2) throw std::invalid_argument("discrete_norm_lp: p must be 1 or 2");
    double s = 0.0;
    for (int i = 0; i < mesh.n_cells(); ++i) {
        const double v = std::abs(cell_values[i]);
        s += mesh.cells()[i].measure * (p == 1 ? v : v * v);
    }
    return (p == 1) ? s : std::sqrt(s);
}

double discrete_norm_h1(const Mesh& mesh, std::span<const double> cell_values,
                        std::span<const double> boundary_values) {
    const double l2 = discrete_norm_lp(mesh, cell_values, 2);
    const double semi = discrete_seminorm_h1(mesh, cell_values, boundary_values);
    return std::sqrt(l2 * l2 + semi * semi);
}

std::vector<std::array<double, 2>> dual_gradient(const Mesh& mesh,
                                                 std::span<const double> cell_values,
                                                 std::span<const double> boundary_values) {
    if (static_cast<int>(cell_values.size()) != mesh.n_cells())
        throw std::invalid_argument("dual_gradient: cell value count mismatch");
    if (static_cast<int>(boundary_values.size()) != mesh.n_boundary_edges())
        throw std::invalid_argument("dual_gradient: boundary value count mismatch");
    std::vector<std::array<double, 2>> grad(mesh.n_edges());
    for (int i = 0; i < mesh.n_edges(); ++i) {
        const Edge& e = mesh.edges()[i];
        const double vKs = (e.kind == EdgeKind::Interior) ? cell_values[e.L]
                                                          : boundary_values[e.bnd_index];
        const double coeff = e.measure / e.dual_measure * (vKs - cell_values[e.K]);
        grad[i] = {coeff * e.normal[0], coeff * e.normal[1]};
    }
    return grad;
}

TriMeshData read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    TriMeshData data;
    enum class Section { None, Nodes, Triangles } section = Section::None;
    std::string line;
    int lineno = 0;
    auto parse_fail = [&](const std::string& what) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        if (line.compare(first, 5, "NODES") == 0) { section = Section::Nodes; continue; }
        if (line.compare(first, 9, "TRIANGLES") == 0) { section = Section::Triangles; continue; }
        if (section == Section::None) parse_fail("expected NODES or TRIANGLES header");
        if (section == Section::Nodes) {
            long idx; double x, y;
            if (!(ls >> idx >> x >> y)) parse_fail("expected 'index x y'");
            if (idx != static_cast<long>(data.nodes.size()))
                parse_fail("node indices must be consecutive from 0");
            data.nodes.push_back({x, y});
        } else {
            long idx; int i, j, k;
            if (!(ls >> idx >> i >> j >> k)) parse_fail("expected 'index i j k'");
            if (idx != static_cast<long>(data.triangles.size()))
                parse_fail("triangle indices must be consecutive from 0");
            data.triangles.push_back({i, j, k});
        }
    }
    if (data.nodes.empty() || data.triangles.empty())
        throw std::runtime_error(path + ": no NODES/TRIANGLES data found");
    return data;
}

void write_mesh_file(const TriMeshData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mesh file: " + path);
    out << "NODES\n";
    out.precision(17);
    for (size_t i = 0; i < data.nodes.size(); ++i)
        out << i << " " << data.nodes[i][0] << " " << data.nodes[i][1] << "\n";
    out << "TRIANGLES\n";
    for (size_t i = 0; i < data.triangles.size(); ++i)
        out << i << " " << data.triangles[i][0] << " " << data.triangles[i][1] << " "
            << data.triangles[i][2] << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

// Largest angle (radians) over the four triangle shape classes of the
// offset-row construction, for aspect rho = hx/hy and wedge offset delta
// (in units of hy).
double offset_row_max_angle(double rho, double delta) {
    auto max_angle = [](Vec2 A, Vec2 B, Vec2 C) {
        double worst = 0.0;
        const Vec2* v[3] = {&A, &B, &C};
        for (int i = 0; i < 3; ++i) {
            const Vec2 u1 = sub(*v[(i + 1) % 3], *v[i]);
            const Vec2 u2 = sub(*v[(i + 2) % 3], *v[i]);
            worst = std::max(worst, std::acos(dot(u1, u2) / (norm(u1) * norm(u2))));
        }
        return worst;
    };
    double w = max_angle({0, 0}, {0, 2}, {delta, 1});                 // boundary wedge
    w = std::max(w, max_angle({0, 0}, {rho, 0}, {delta, 1}));         // first up-triangle
    w = std::max(w, max_angle({delta, 1}, {1.5 * rho, 1}, {rho, 0})); // first down-triangle
    w = std::max(w, max_angle({rho, 0}, {2 * rho, 0}, {1.5 * rho, 1}));
    return w;
}

}  // namespace

TriMeshData generate_acute_square_mesh(int nx, int ny) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("generate_acute_square_mesh: nx, ny >= 2");
    if (ny % 2 != 0) throw std::invalid_argument("generate_acute_square_mesh: ny must be even");
    const double rho = static_cast<double>(ny) / nx;  // hx/hy on the unit square
    if (!(rho > 1.0) || !(rho < 2.0))
        throw std::invalid_argument(
            "generate_acute_square_mesh: aspect ny/nx must lie strictly in (1,2) "
            "for an acute triangulation (got " + std::to_string(rho) + ")");

    // pick the wedge offset minimizing the largest angle
    double best_delta = 0.5 * (1.0 + rho), best_angle = offset_row_max_angle(rho, best_delta);
    for (int i = 1; i < 512; ++i) {
        const double delta = 1.0 + (rho - 1.0) * i / 512.0;
        const double ang = offset_row_max_angle(rho, delta);
        if (ang < best_angle) { best_angle = ang; best_delta = delta; }
    }

    const double hx = 1.0 / nx, hy = 1.0 / ny;
    const double d = best_delta * hy;

    TriMeshData data;
    std::vector<std::vector<int>> row_nodes(ny + 1);
    for (int r = 0; r <= ny; ++r) {
        if (r % 2 == 0) {
            for (int j = 0; j <= nx; ++j) {
                row_nodes[r].push_back(static_cast<int>(data.nodes.size()));
                data.nodes.push_back({j * hx, r * hy});
            }
        } else {
            row_nodes[r].push_back(static_cast<int>(data.nodes.size()));
            data.nodes.push_back({d, r * hy});
            for (int j = 1; j <= nx - 2; ++j) {
                row_nodes[r].push_back(static_cast<int>(data.nodes.size()));
                data.nodes.push_back({(j + 0.5) * hx, r * hy});
            }
            row_nodes[r].push_back(static_cast<int>(data.nodes.size()));
            data.nodes.push_back({1.0 - d, r * hy});
        }
    }

    for (int r = 0; r < ny; ++r) {
        const auto& aligned = (r % 2 == 0) ? row_nodes[r] : row_nodes[r + 1];
        const auto& offset = (r % 2 == 0) ? row_nodes[r + 1] : row_nodes[r];
        for (int j = 0; j < nx; ++j)
            data.triangles.push_back({aligned[j], aligned[j + 1], offset[j]});
        for (int j = 0; j + 1 < nx; ++j)
            data.triangles.push_back({offset[j], offset[j + 1], aligned[j + 1]});
    }
    for (int k = 0; k + 2 <= ny; k += 2) {
        data.triangles.push_back({row_nodes[k].front(), row_nodes[k + 2].front(),
                                  row_nodes[k + 1].front()});
        data.triangles.push_back({row_nodes[k].back(), row_nodes[k + 2].back(),
                                  row_nodes[k + 1].back()});
    }
    return data;
}

}  // namespace biofv
