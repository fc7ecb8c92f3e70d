#ifndef BIOFV_CONFIG_HPP
#define BIOFV_CONFIG_HPP

#include "biofv/harness.hpp"
#include "biofv/model.hpp"
#include "biofv/solver.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace biofv {

/// Raised on malformed config files; messages carry file:line context.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Preset { Test1, Test2, Custom };

struct IntervalMeshSpec {
    int n_cells = 80;
    double x0 = 0.0;
    double x1 = 1.0;
};
struct FileMeshSpec {
    std::string path;
};
struct AcuteSquareMeshSpec {
    int nx = 36;
    int ny = 50;
};
using MeshSpec = std::variant<IntervalMeshSpec, FileMeshSpec, AcuteSquareMeshSpec>;

/// Initial data description. 1D: S0(x) = 1 - s0_amplitude sin(pi x),
/// M0(x) = h1 g(x-c1) + h2 g(x-c2) with g(x) = max(1 - sharpness x^2, 0).
/// 2D: S0 = s0_value, radial bumps around (c1x,c1y), (c2x,c2y).
struct InitialData {
    double s0_amplitude = 0.2;  // 1D
    double s0_value = 1.0;      // 2D
    double bump1_height = 0.2, bump2_height = 0.9;
    double bump1_x = 0.38, bump1_y = 0.5;
    double bump2_x = 0.62, bump2_y = 0.5;
    double sharpness = 81.0;
};

struct RunConfig {
    Preset preset = Preset::Test1;
    ModelParams params;
    MeshSpec mesh;
    TimeControls controls;
    double t_end = 1e-3;
    InitialData initial;
    std::vector<double> snapshot_times;
    double merge_threshold = 1e-3;
    std::optional<double> m0;  ///< enables the positivity-decay monitor

    // convergence-study section
    std::vector<int> grids{40, 80, 160, 320};
    int reference_n = 2560;

    ScalarField make_S0() const;
    ScalarField make_M0() const;
    Mesh build_mesh() const;
    void validate() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);

}  // namespace biofv

#endif
