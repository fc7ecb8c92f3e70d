#ifndef BIOFV_DIAGNOSTICS_HPP
#define BIOFV_DIAGNOSTICS_HPP

#include "biofv/mesh.hpp"
#include "biofv/model.hpp"
#include "biofv/scheme.hpp"

#include <optional>

namespace biofv {

/// Per-step monitor quantities recorded along a run.
struct DiagnosticsRecord {
    double t = 0.0;
    double dt = 0.0;
    double min_S = 0.0, max_S = 0.0;
    double min_M = 0.0, max_M = 0.0;
    std::optional<double> z_norm;  ///< ||Z(M)||_{0,1,M}, only when MD > 0
    double f_h1_norm = 0.0;        ///< ||F(M)||_{1,2,M} (boundary value F(MD))
    double s_h1_norm = 0.0;        ///< ||S||_{1,2,M} (boundary value 1)
    int newton_iterations = 0;
    int cells_above_threshold = 0;  ///< #{K : M_K > threshold}
    double threshold = 1e-3;
};

DiagnosticsRecord make_diagnostics(const Mesh& mesh, const Nonlinearity& nl,
                                   const State& state, double dt, int newton_iterations,
                                   double threshold = 1e-3);

}  // namespace biofv

#endif
