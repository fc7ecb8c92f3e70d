#include "biofv/config.hpp"

#include "biofv/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace biofv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& ctx) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& v, const std::string& ctx) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": expected an integer, got '" + v + "'");
    }
}

std::vector<double> parse_double_list(const std::string& v, const std::string& ctx) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, ctx));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& ctx) {
    std::vector<int> out;
    for (double d : parse_double_list(v, ctx)) out.push_back(static_cast<int>(d));
    return out;
}

void apply_preset(RunConfig& cfg) {
    switch (cfg.preset) {
        case Preset::Test1: {
            cfg.params = test1_data().params;
            cfg.mesh = IntervalMeshSpec{80, 0.0, 1.0};
            cfg.controls.mode = TimeMode::Fixed;
            cfg.controls.dt_fixed = 1e-6;
            cfg.controls.newton_tol = 1e-10;
            cfg.t_end = 1e-3;
            cfg.initial = InitialData{};  // 1D defaults
            break;
        }
        case Preset::Test2: {
            cfg.params = test2_data().params;
            cfg.mesh = AcuteSquareMeshSpec{36, 50};
            cfg.controls = floc_controls();
            cfg.t_end = 0.1;
            cfg.initial.s0_value = 1.0;
            cfg.initial.bump1_height = 0.3;
            cfg.initial.bump2_height = 0.9;
            cfg.initial.bump1_x = 0.4;
            cfg.initial.bump1_y = 0.5;
            cfg.initial.bump2_x = 0.6;
            cfg.initial.bump2_y = 0.5;
            cfg.initial.sharpness = FlocConfig{}.bump_sharpness;
            cfg.snapshot_times = {1e-4, 1e-2, 0.1};
            break;
        }
        case Preset::Custom:
            break;
    }
}

}  // namespace

ScalarField RunConfig::make_S0() const {
    const bool one_d = std::holds_alternative<IntervalMeshSpec>(mesh);
    if (one_d) {
        const double amp = initial.s0_amplitude;
        return [amp](double x, double) { return 1.0 - amp * std::sin(std::numbers::pi * x); };
    }
    const double v = initial.s0_value;
    return [v](double, double) { return v; };
}

ScalarField RunConfig::make_M0() const {
    const InitialData in = initial;
    const bool one_d = std::holds_alternative<IntervalMeshSpec>(mesh);
    if (one_d)
        return [in](double x, double) {
            auto bump = [&](double z) { return std::max(1.0 - in.sharpness * z * z, 0.0); };
            return in.bump1_height * bump(x - in.bump1_x) + in.bump2_height * bump(x - in.bump2_x);
        };
    return [in](double x, double y) {
        auto bump = [&](double u, double v) {
            return std::max(1.0 - in.sharpness * (u * u + v * v), 0.0);
        };
        return in.bump1_height * bump(x - in.bump1_x, y - in.bump1_y) +
               in.bump2_height * bump(x - in.bump2_x, y - in.bump2_y);
    };
}

Mesh RunConfig::build_mesh() const {
    if (const auto* iv = std::get_if<IntervalMeshSpec>(&mesh))
        return build_interval_mesh(iv->n_cells, iv->x0, iv->x1);
    if (const auto* fs = std::get_if<FileMeshSpec>(&mesh)) {
        const TriMeshData data = read_mesh_file(fs->path);
        return build_triangular_mesh(data.nodes, data.triangles);
    }
    const auto& sq = std::get<AcuteSquareMeshSpec>(mesh);
    const TriMeshData data = generate_acute_square_mesh(sq.nx, sq.ny);
    return build_triangular_mesh(data.nodes, data.triangles);
}

void RunConfig::validate() const {
    params.validate();
    controls.validate();
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (const auto* fs = std::get_if<FileMeshSpec>(&mesh))
        if (!std::filesystem::exists(fs->path))
            throw ConfigError("mesh file does not exist: " + fs->path);
    if (controls.mode == TimeMode::Fixed) {
        const long n = std::llround(t_end / controls.dt_fixed);
        if (n < 1 || std::abs(n * controls.dt_fixed - t_end) > 1e-8 * std::max(t_end, controls.dt_fixed))
            throw ConfigError("fixed mode: t_end must be an integer multiple of dt");
    }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    bool preset_applied = false;

    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;

    // first pass just to find the preset, so later keys act as overrides
    {
        std::istringstream scan(text);
        std::string l, sec;
        int ln = 0;
        while (std::getline(scan, l)) {
            ++ln;
            l = trim(l);
            if (l.empty() || l[0] == '#') continue;
            if (l.front() == '[') {
                sec = l;
                continue;
            }
            const auto eq = l.find('=');
            if (eq == std::string::npos) continue;
            if (trim(l.substr(0, eq)) == "preset" && sec == "[problem]") {
                const std::string v = trim(l.substr(eq + 1));
                if (v == "test1") cfg.preset = Preset::Test1;
                else if (v == "test2") cfg.preset = Preset::Test2;
                else if (v == "custom") cfg.preset = Preset::Custom;
                else
                    throw ConfigError(origin + ":" + std::to_string(ln) +
                                      ": unknown preset '" + v + "'");
                apply_preset(cfg);
                preset_applied = true;
            }
        }
    }
    if (!preset_applied) apply_preset(cfg);

    while (std::getline(in, line)) {
        ++lineno;
        const std::string ctx = origin + ":" + std::to_string(lineno);
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(ctx + ": malformed section header");
            section = line;
            if (section != "[problem]" && section != "[mesh]" && section != "[time]" &&
                section != "[output]" && section != "[monitor]" && section != "[convergence]")
                throw ConfigError(ctx + ": unknown section " + section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(ctx + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string kctx = ctx + " (" + key + ")";

        if (section == "[problem]") {
            if (key == "preset") continue;  // handled in the first pass
            else if (key == "d1") cfg.params.d1 = parse_double(val, kctx);
            else if (key == "d2") cfg.params.d2 = parse_double(val, kctx);
            else if (key == "kappa1") cfg.params.kappa1 = parse_double(val, kctx);
            else if (key == "kappa2") cfg.params.kappa2 = parse_double(val, kctx);
            else if (key == "kappa3") cfg.params.kappa3 = parse_double(val, kctx);
            else if (key == "kappa4") cfg.params.kappa4 = parse_double(val, kctx);
            else if (key == "a") cfg.params.a = parse_double(val, kctx);
            else if (key == "b") cfg.params.b = parse_double(val, kctx);
            else if (key == "MD") cfg.params.MD = parse_double(val, kctx);
            else if (key == "s0_amplitude") cfg.initial.s0_amplitude = parse_double(val, kctx);
            else if (key == "s0_value") cfg.initial.s0_value = parse_double(val, kctx);
            else if (key == "bump1_height") cfg.initial.bump1_height = parse_double(val, kctx);
            else if (key == "bump2_height") cfg.initial.bump2_height = parse_double(val, kctx);
            else if (key == "bump1_x") cfg.initial.bump1_x = parse_double(val, kctx);
            else if (key == "bump1_y") cfg.initial.bump1_y = parse_double(val, kctx);
            else if (key == "bump2_x") cfg.initial.bump2_x = parse_double(val, kctx);
            else if (key == "bump2_y") cfg.initial.bump2_y = parse_double(val, kctx);
            else if (key == "bump_sharpness") cfg.initial.sharpness = parse_double(val, kctx);
            else throw ConfigError(kctx + ": unknown key in [problem]");
        } else if (section == "[mesh]") {
            if (key == "kind") {
                if (val == "interval") { if (!std::holds_alternative<IntervalMeshSpec>(cfg.mesh)) cfg.mesh = IntervalMeshSpec{}; }
                else if (val == "file") { if (!std::holds_alternative<FileMeshSpec>(cfg.mesh)) cfg.mesh = FileMeshSpec{}; }
                else if (val == "acute_square") { if (!std::holds_alternative<AcuteSquareMeshSpec>(cfg.mesh)) cfg.mesh = AcuteSquareMeshSpec{}; }
                else throw ConfigError(kctx + ": unknown mesh kind '" + val + "'");
            } else if (key == "n_cells") {
                if (auto* iv = std::get_if<IntervalMeshSpec>(&cfg.mesh)) iv->n_cells = parse_int(val, kctx);
                else throw ConfigError(kctx + ": n_cells applies to interval meshes");
            } else if (key == "x0" || key == "x1") {
                auto* iv = std::get_if<IntervalMeshSpec>(&cfg.mesh);
                if (!iv) throw ConfigError(kctx + ": " + key + " applies to interval meshes");
                (key == "x0" ? iv->x0 : iv->x1) = parse_double(val, kctx);
            } else if (key == "file") {
                cfg.mesh = FileMeshSpec{val};
            } else if (key == "nx" || key == "ny") {
                auto* sq = std::get_if<AcuteSquareMeshSpec>(&cfg.mesh);
                if (!sq) throw ConfigError(kctx + ": " + key + " applies to acute_square meshes");
                (key == "nx" ? sq->nx : sq->ny) = parse_int(val, kctx);
            } else throw ConfigError(kctx + ": unknown key in [mesh]");
        } else if (section == "[time]") {
            if (key == "mode") {
                if (val == "fixed") cfg.controls.mode = TimeMode::Fixed;
                else if (val == "adaptive") cfg.controls.mode = TimeMode::Adaptive;
                else throw ConfigError(kctx + ": mode must be fixed or adaptive");
            }
            else if (key == "dt") cfg.controls.dt_fixed = parse_double(val, kctx);
            else if (key == "t_end") cfg.t_end = parse_double(val, kctx);
            else if (key == "newton_tol") cfg.controls.newton_tol = parse_double(val, kctx);
            else if (key == "newton_max_iter") cfg.controls.newton_max_iter = parse_int(val, kctx);
            else if (key == "dt_min") cfg.controls.dt_min = parse_double(val, kctx);
            else if (key == "dt_max") cfg.controls.dt_max = parse_double(val, kctx);
            else if (key == "dt_init") cfg.controls.dt_init = parse_double(val, kctx);
            else if (key == "shrink") cfg.controls.shrink = parse_double(val, kctx);
            else if (key == "grow") cfg.controls.grow = parse_double(val, kctx);
            else throw ConfigError(kctx + ": unknown key in [time]");
        } else if (section == "[output]") {
            if (key == "snapshot_times") cfg.snapshot_times = parse_double_list(val, kctx);
            else if (key == "merge_threshold") cfg.merge_threshold = parse_double(val, kctx);
            else throw ConfigError(kctx + ": unknown key in [output]");
        } else if (section == "[monitor]") {
            if (key == "m0") cfg.m0 = parse_double(val, kctx);
            else throw ConfigError(kctx + ": unknown key in [monitor]");
        } else if (section == "[convergence]") {
            if (key == "grids") cfg.grids = parse_int_list(val, kctx);
            else if (key == "reference_n") cfg.reference_n = parse_int(val, kctx);
            else throw ConfigError(kctx + ": unknown key in [convergence]");
        } else {
            throw ConfigError(ctx + ": key outside of any section");
        }
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace biofv
