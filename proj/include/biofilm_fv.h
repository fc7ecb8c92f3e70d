/* C interface of the biofilm finite-volume solver library.
 *
 * All functions return a bfv_status; BFV_OK is 0. On any failure the
 * thread-local message retrieved by bfv_last_error() describes the cause.
 * Objects are opaque handles released with the matching *_free function.
 */
#ifndef BIOFILM_FV_H
#define BIOFILM_FV_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bfv_status {
    BFV_OK = 0,
    BFV_ERR_INVALID_ARGUMENT = 1,
    BFV_ERR_INADMISSIBLE_MESH = 2,
    BFV_ERR_PARSE = 3,
    BFV_ERR_DOMAIN = 4,
    BFV_ERR_SOLVER = 5,
    BFV_ERR_IO = 6,
    BFV_ERR_MONITOR = 7,
    BFV_ERR_INTERNAL = 99
} bfv_status;

typedef struct bfv_mesh bfv_mesh;

/* Message describing the most recent failure on this thread. */
const char* bfv_last_error(void);

const char* bfv_version(void);

/* ---- meshes ---- */

bfv_status bfv_mesh_create_interval(int n_cells, double x0, double x1, bfv_mesh** out);
bfv_status bfv_mesh_read(const char* path, bfv_mesh** out);
/* Structured acute triangulation of the unit square (2*nx*ny triangles). */
bfv_status bfv_mesh_generate_square(int nx, int ny, bfv_mesh** out);
bfv_status bfv_mesh_write(const bfv_mesh* mesh, const char* path);
void bfv_mesh_free(bfv_mesh* mesh);

int bfv_mesh_cell_count(const bfv_mesh* mesh);
int bfv_mesh_edge_count(const bfv_mesh* mesh);
int bfv_mesh_dim(const bfv_mesh* mesh);

typedef struct bfv_mesh_report {
    double xi_observed;
    double estmesh_lhs;
    double estmesh_rhs;
    double orthogonality_max_violation;
    double diamond_identity_max_rel;
    double dual_partition_rel_defect;
    double total_measure;
    int admissible; /* 1 when all report thresholds hold */
} bfv_mesh_report;

bfv_status bfv_mesh_validate(const bfv_mesh* mesh, bfv_mesh_report* out);

/* ---- runs ---- */

/* Execute a config-file run; outputs (snap_<t>.csv, diag.csv, summary.txt)
 * are written into out_dir. snapshot_times, when non-NULL, overrides the
 * config as a comma-separated list. */
bfv_status bfv_run(const char* config_path, const char* out_dir,
                   const char* snapshot_times);

/* Convergence study; writes convergence.csv into out_dir and returns the
 * fitted slopes. slope_S/slope_M may be NULL. An empty config_path runs the
 * synthetic self-test (exact-h^2 data, slope 2 by construction). */
bfv_status bfv_run_convergence(const char* config_path, const char* out_dir,
                               double* slope_S, double* slope_M);

#ifdef __cplusplus
}
#endif

#endif /* BIOFILM_FV_H */
