#ifndef BIOFV_RUN_HPP
#define BIOFV_RUN_HPP

#include "biofv/config.hpp"
#include "biofv/harness.hpp"

#include <optional>
#include <string>

namespace biofv {

/// Shortest round-trip decimal representation, '.' separator.
std::string format_double(double v);

/// Execute the solve described by a config file. Writes snap_<t>.csv
/// (cell_id, x[, y], S, M), diag.csv, and summary.txt into out_dir.
/// Throws on config, solver, or monitor failures.
void cmd_run(const std::string& config_path, const std::string& out_dir,
             const std::optional<std::string>& snapshot_times_override = std::nullopt);

/// Convergence study driven by the [convergence] section; writes
/// convergence.csv (n_cells,h,err_S,err_M plus a slope summary line) into
/// out_dir and prints the fitted slopes. With self_test, writes a synthetic
/// exact-h^2 table instead of running solves.
ConvergenceTable cmd_convergence(const std::string& config_path, const std::string& out_dir,
                                 bool self_test = false);

/// Parse and validate a mesh file; prints the admissibility report as
/// key=value lines. Throws InadmissibleMeshError / parse errors; returns
/// false when the constructed mesh fails the report thresholds.
bool cmd_check_mesh(const std::string& mesh_path);

/// Write the structured acute triangulation to a mesh file.
void cmd_gen_mesh(int nx, int ny, const std::string& out_path);

}  // namespace biofv

#endif
