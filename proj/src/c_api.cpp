#include "biofilm_fv.h"

#include "biofv/config.hpp"
#include "biofv/harness.hpp"
#include "biofv/mesh.hpp"
#include "biofv/run.hpp"
#include "biofv/solver.hpp"

#include <cstring>
#include <optional>
#include <string>

struct bfv_mesh {
    biofv::Mesh mesh;
    biofv::TriMeshData source;  // empty for 1D meshes
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
bfv_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return BFV_ERR_INVALID_ARGUMENT;
    } catch (const std::domain_error& e) {
        set_error(e.what());
        return BFV_ERR_DOMAIN;
    } catch (const biofv::InadmissibleMeshError& e) {
        set_error(e.what());
        return BFV_ERR_INADMISSIBLE_MESH;
    } catch (const biofv::ConfigError& e) {
        set_error(e.what());
        return BFV_ERR_PARSE;
    } catch (const biofv::SolveError& e) {
        set_error(e.what());
        return BFV_ERR_SOLVER;
    } catch (const std::exception& e) {
        set_error(e.what());
        return BFV_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return BFV_ERR_INTERNAL;
    }
}

}  // namespace

extern "C" {

const char* bfv_last_error(void) { return g_last_error.c_str(); }

const char* bfv_version(void) { return "1.0.0"; }

bfv_status bfv_mesh_create_interval(int n_cells, double x0, double x1, bfv_mesh** out) {
    if (!out) {
        set_error("out must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto* h = new bfv_mesh{biofv::build_interval_mesh(n_cells, x0, x1), {}};
        *out = h;
        return BFV_OK;
    });
}

bfv_status bfv_mesh_read(const char* path, bfv_mesh** out) {
    if (!out || !path) {
        set_error("path and out must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> bfv_status {
        biofv::TriMeshData data;
        try {
            data = biofv::read_mesh_file(path);
        } catch (const std::runtime_error& e) {
            set_error(e.what());
            return BFV_ERR_PARSE;
        }
        auto* h = new bfv_mesh{biofv::build_triangular_mesh(data.nodes, data.triangles),
                               std::move(data)};
        *out = h;
        return BFV_OK;
    });
}

bfv_status bfv_mesh_generate_square(int nx, int ny, bfv_mesh** out) {
    if (!out) {
        set_error("out must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        biofv::TriMeshData data = biofv::generate_acute_square_mesh(nx, ny);
        auto* h = new bfv_mesh{biofv::build_triangular_mesh(data.nodes, data.triangles),
                               std::move(data)};
        *out = h;
        return BFV_OK;
    });
}

bfv_status bfv_mesh_write(const bfv_mesh* mesh, const char* path) {
    if (!mesh || !path) {
        set_error("mesh and path must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    if (mesh->source.nodes.empty()) {
        set_error("1D meshes have no file representation");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> bfv_status {
        try {
            biofv::write_mesh_file(mesh->source, path);
        } catch (const std::runtime_error& e) {
            set_error(e.what());
            return BFV_ERR_IO;
        }
        return BFV_OK;
    });
}

void bfv_mesh_free(bfv_mesh* mesh) { delete mesh; }

int bfv_mesh_cell_count(const bfv_mesh* mesh) { return mesh ? mesh->mesh.n_cells() : -1; }
int bfv_mesh_edge_count(const bfv_mesh* mesh) { return mesh ? mesh->mesh.n_edges() : -1; }
int bfv_mesh_dim(const bfv_mesh* mesh) { return mesh ? mesh->mesh.dim() : -1; }

bfv_status bfv_mesh_validate(const bfv_mesh* mesh, bfv_mesh_report* out) {
    if (!mesh || !out) {
        set_error("mesh and out must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const biofv::AdmissibilityReport r = biofv::validate_admissibility(mesh->mesh);
        out->xi_observed = r.xi_observed;
        out->estmesh_lhs = r.estmesh_lhs;
        out->estmesh_rhs = r.estmesh_rhs;
        out->orthogonality_max_violation = r.orthogonality_max_violation;
        out->diamond_identity_max_rel = r.diamond_identity_max_rel;
        out->dual_partition_rel_defect = r.dual_partition_rel_defect;
        out->total_measure = r.total_measure;
        out->admissible = (r.xi_observed > 0.0 && r.estmesh_lhs <= r.estmesh_rhs + 1e-10 &&
                           r.orthogonality_max_violation <= 1e-10 &&
                           r.diamond_identity_max_rel <= 1e-10 &&
                           r.dual_partition_rel_defect <= 1e-10)
                              ? 1
                              : 0;
        return BFV_OK;
    });
}

bfv_status bfv_run(const char* config_path, const char* out_dir,
                   const char* snapshot_times) {
    if (!config_path || !out_dir) {
        set_error("config_path and out_dir must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> bfv_status {
        std::optional<std::string> snaps;
        if (snapshot_times) snaps = std::string(snapshot_times);
        try {
            biofv::cmd_run(config_path, out_dir, snaps);
        } catch (const std::runtime_error& e) {
            // monitor failures surface as plain runtime errors from cmd_run
            if (std::string(e.what()).find("invariant monitor") != std::string::npos) {
                set_error(e.what());
                return BFV_ERR_MONITOR;
            }
            throw;
        }
        return BFV_OK;
    });
}

bfv_status bfv_run_convergence(const char* config_path, const char* out_dir, double* slope_S,
                               double* slope_M) {
    if (!config_path || !out_dir) {
        set_error("config_path and out_dir must not be null");
        return BFV_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const bool self_test = config_path[0] == '\0';
        const biofv::ConvergenceTable t =
            biofv::cmd_convergence(config_path, out_dir, self_test);
        if (slope_S) *slope_S = t.slope_S;
        if (slope_M) *slope_M = t.slope_M;
        return BFV_OK;
    });
}

}  // extern "C"
