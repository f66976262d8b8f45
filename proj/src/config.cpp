#include "chsep/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "chsep/rng.hpp"

namespace chsep {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

std::string fmt(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt(v[i]);
    }
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for '" + key + "': " + s);
    }
}

int parse_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for '" + key + "': " + s);
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid seed for '" + key + "': " + s);
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key));
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known = {"grid",   "potential", "reaction", "kernel",
                                                        "solver", "tumor",     "experiment"};
            if (!known.count(section))
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section");
        const std::string qual = section + "." + key;
        if (!seen.insert(qual).second) throw ConfigError("duplicate key '" + qual + "'");

        if (section == "grid") {
            if (key == "nx") cfg.grid.nx = parse_int(value, qual);
            else if (key == "ny") cfg.grid.ny = parse_int(value, qual);
            else if (key == "lx") cfg.grid.lx = parse_double(value, qual);
            else if (key == "ly") cfg.grid.ly = parse_double(value, qual);
            else throw ConfigError("unknown key '" + qual + "'");
        } else if (section == "potential") {
            if (key == "kind") cfg.potential.kind = value;
            else if (key == "theta") cfg.potential.theta = parse_double(value, qual);
            else if (key == "theta0") cfg.potential.theta0 = parse_double(value, qual);
            else throw ConfigError("unknown key '" + qual + "'");
        } else if (section == "reaction") {
            if (key == "kind") cfg.reaction.kind = value;
            else if (key == "m") cfg.reaction.m = parse_double(value, qual);
            else if (key == "c") cfg.reaction.c = parse_double(value, qual);
            else if (key == "m_bar") cfg.reaction.m_bar = parse_double(value, qual);
            else if (key == "mask") cfg.reaction.mask = value;
            else if (key == "image") cfg.reaction.image = value;
            else if (key == "image_amplitude") cfg.reaction.image_amplitude = parse_double(value, qual);
            else if (key == "image_stripes") cfg.reaction.image_stripes = parse_int(value, qual);
            else if (key == "delta_n") cfg.reaction.delta_n = parse_double(value, qual);
            else throw ConfigError("unknown key '" + qual + "'");
        } else if (section == "kernel") {
            if (key == "kind") cfg.kernel.kind = value;
            else if (key == "sigma") cfg.kernel.sigma = parse_double(value, qual);
            else if (key == "mass") cfg.kernel.mass = parse_double(value, qual);
            else throw ConfigError("unknown key '" + qual + "'");
        } else if (section == "solver") {
            if (key == "model") cfg.solver.model = value;
            else if (key == "lambda") cfg.solver.lambda = parse_double(value, qual);
            else if (key == "dt") cfg.solver.dt = parse_double(value, qual);
            else if (key == "t_end") cfg.solver.t_end = parse_double(value, qual);
            else if (key == "stabilization") cfg.solver.stabilization = parse_double(value, qual);
            else if (key == "newton_tol") cfg.solver.newton_tol = parse_double(value, qual);
            else if (key == "newton_max") cfg.solver.newton_max = parse_int(value, qual);
            else if (key == "clip") cfg.solver.clip = parse_double(value, qual);
            else if (key == "snapshot_stride") cfg.solver.snapshot_stride = parse_int(value, qual);
            else if (key == "ic") cfg.solver.ic = value;
            else if (key == "noise_mean") cfg.solver.noise_mean = parse_double(value, qual);
            else if (key == "noise_amplitude") cfg.solver.noise_amplitude = parse_double(value, qual);
            else if (key == "seed") cfg.solver.seed = parse_u64(value, qual);
            else if (key == "g") cfg.solver.g = value;
            else throw ConfigError("unknown key '" + qual + "'");
        } else if (section == "tumor") {
            if (key == "chi") cfg.tumor.chi = parse_double(value, qual);
            else if (key == "supply") cfg.tumor.supply = parse_double(value, qual);
            else if (key == "consumption") cfg.tumor.consumption = parse_double(value, qual);
            else if (key == "n_boundary") cfg.tumor.n_boundary = parse_double(value, qual);
            else if (key == "n0") cfg.tumor.n0 = parse_double(value, qual);
            else throw ConfigError("unknown key '" + qual + "'");
        } else if (section == "experiment") {
            if (key == "kind") cfg.experiment.kind = value;
            else if (key == "lambdas") cfg.experiment.lambdas = parse_list(value, qual);
            else if (key == "t_probe") cfg.experiment.t_probe = parse_double(value, qual);
            else if (key == "lambda1") cfg.experiment.lambda1 = parse_double(value, qual);
            else if (key == "lambda2") cfg.experiment.lambda2 = parse_double(value, qual);
            else if (key == "probe_count") cfg.experiment.probe_count = parse_int(value, qual);
            else if (key == "deltas") cfg.experiment.deltas = parse_list(value, qual);
            else if (key == "samples") cfg.experiment.samples = parse_int(value, qual);
            else if (key == "seed") cfg.experiment.seed = parse_u64(value, qual);
            else throw ConfigError("unknown key '" + qual + "'");
        }
    }

    static const std::set<std::string> reaction_kinds = {"none", "oono", "inpainting", "tumor"};
    if (!reaction_kinds.count(cfg.reaction.kind))
        throw ConfigError("unknown reaction kind '" + cfg.reaction.kind + "'");
    if (cfg.kernel.kind != "none" && cfg.kernel.kind != "gaussian")
        throw ConfigError("unknown kernel kind '" + cfg.kernel.kind + "'");
    if (cfg.potential.kind != "flory_huggins")
        throw ConfigError("unknown potential kind '" + cfg.potential.kind + "'");
    if (cfg.solver.model != "local" && cfg.solver.model != "nonlocal")
        throw ConfigError("unknown solver model '" + cfg.solver.model + "'");
    if (cfg.solver.ic != "pure_phase" && cfg.solver.ic != "noise")
        throw ConfigError("unknown initial condition '" + cfg.solver.ic + "'");
    static const std::set<std::string> experiment_kinds = {"run", "sweep_lambda", "cdep", "ineq"};
    if (!experiment_kinds.count(cfg.experiment.kind))
        throw ConfigError("unknown experiment kind '" + cfg.experiment.kind + "'");
    if (cfg.solver.model == "nonlocal" && cfg.kernel.kind == "none")
        throw ConfigError("nonlocal model requires a kernel");
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };

    out += "[grid]\n";
    kv("nx", fmt(cfg.grid.nx));
    kv("ny", fmt(cfg.grid.ny));
    kv("lx", fmt(cfg.grid.lx));
    kv("ly", fmt(cfg.grid.ly));

    out += "\n[potential]\n";
    kv("kind", cfg.potential.kind);
    kv("theta", fmt(cfg.potential.theta));
    kv("theta0", fmt(cfg.potential.theta0));

    out += "\n[reaction]\n";
    kv("kind", cfg.reaction.kind);
    if (cfg.reaction.kind == "oono") {
        kv("m", fmt(cfg.reaction.m));
        kv("c", fmt(cfg.reaction.c));
    } else if (cfg.reaction.kind == "inpainting") {
        kv("m_bar", fmt(cfg.reaction.m_bar));
        kv("mask", cfg.reaction.mask);
        kv("image", cfg.reaction.image);
        if (cfg.reaction.image == "stripes" || cfg.reaction.image == "constant")
            kv("image_amplitude", fmt(cfg.reaction.image_amplitude));
        if (cfg.reaction.image == "stripes") kv("image_stripes", fmt(cfg.reaction.image_stripes));
    } else if (cfg.reaction.kind == "tumor") {
        kv("m", fmt(cfg.reaction.m));
        kv("delta_n", fmt(cfg.reaction.delta_n));
    }

    out += "\n[kernel]\n";
    kv("kind", cfg.kernel.kind);
    if (cfg.kernel.kind == "gaussian") {
        kv("sigma", fmt(cfg.kernel.sigma));
        kv("mass", fmt(cfg.kernel.mass));
    }

    out += "\n[solver]\n";
    kv("model", cfg.solver.model);
    kv("lambda", fmt(cfg.solver.lambda));
    kv("dt", fmt(cfg.solver.dt));
    kv("t_end", fmt(cfg.solver.t_end));
    kv("stabilization", fmt(cfg.solver.stabilization));
    kv("newton_tol", fmt(cfg.solver.newton_tol));
    kv("newton_max", fmt(cfg.solver.newton_max));
    kv("clip", fmt(cfg.solver.clip));
    kv("snapshot_stride", fmt(cfg.solver.snapshot_stride));
    kv("ic", cfg.solver.ic);
    if (cfg.solver.ic == "noise") {
        kv("noise_mean", fmt(cfg.solver.noise_mean));
        kv("noise_amplitude", fmt(cfg.solver.noise_amplitude));
        kv("seed", fmt(cfg.solver.seed));
    }
    if (cfg.solver.g != "none") kv("g", cfg.solver.g);

    if (cfg.reaction.kind == "tumor") {
        out += "\n[tumor]\n";
        kv("chi", fmt(cfg.tumor.chi));
        kv("supply", fmt(cfg.tumor.supply));
        kv("consumption", fmt(cfg.tumor.consumption));
        kv("n_boundary", fmt(cfg.tumor.n_boundary));
        kv("n0", fmt(cfg.tumor.n0));
    }

    out += "\n[experiment]\n";
    kv("kind", cfg.experiment.kind);
    if (cfg.experiment.kind == "sweep_lambda") {
        kv("lambdas", fmt(cfg.experiment.lambdas));
        kv("t_probe", fmt(cfg.experiment.t_probe));
    } else if (cfg.experiment.kind == "cdep") {
        kv("lambda1", fmt(cfg.experiment.lambda1));
        kv("lambda2", fmt(cfg.experiment.lambda2));
        kv("probe_count", fmt(cfg.experiment.probe_count));
    } else if (cfg.experiment.kind == "ineq") {
        kv("deltas", fmt(cfg.experiment.deltas));
        kv("samples", fmt(cfg.experiment.samples));
        kv("seed", fmt(cfg.experiment.seed));
    }
    return out;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

ScalarField build_mask(const ExperimentConfig& cfg, const Grid& grid) {
    const std::string& spec = cfg.reaction.mask;
    if (spec == "halfplane") {
        ScalarField mask(grid);
        for (int i = 0; i < grid.nx; ++i)
            for (int j = 0; j < grid.ny; ++j) mask.at(i, j) = (i * grid.dx() < 0.5 * grid.lx);
        return mask;
    }
    if (spec.rfind("file:", 0) == 0) return read_snapshot(spec.substr(5)).first;
    throw ConfigError("unknown mask spec '" + spec + "'");
}

ScalarField build_image(const ExperimentConfig& cfg, const Grid& grid) {
    const std::string& spec = cfg.reaction.image;
    if (spec == "constant") return ScalarField::constant(grid, cfg.reaction.image_amplitude);
    if (spec == "stripes") {
        // alternating +-amplitude bands across y
        ScalarField img(grid);
        const int bands = std::max(cfg.reaction.image_stripes, 1);
        for (int j = 0; j < grid.ny; ++j) {
            const int band = static_cast<int>(j * grid.dy() / grid.ly * bands);
            const double v = (band % 2 == 0) ? cfg.reaction.image_amplitude
                                             : -cfg.reaction.image_amplitude;
            for (int i = 0; i < grid.nx; ++i) img.at(i, j) = v;
        }
        return img;
    }
    if (spec.rfind("file:", 0) == 0) return read_snapshot(spec.substr(5)).first;
    throw ConfigError("unknown image spec '" + spec + "'");
}

} // namespace

SolverConfig build_solver_config(const ExperimentConfig& cfg) {
    SolverConfig sc;
    sc.grid = Grid{cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly};
    sc.pot = SingularPotential::flory_huggins(cfg.potential.theta, cfg.potential.theta0);
    if (cfg.reaction.kind == "oono") {
        sc.reaction = ReactionSpec::oono(cfg.reaction.m, cfg.reaction.c, sc.grid);
    } else if (cfg.reaction.kind == "inpainting") {
        sc.reaction = ReactionSpec::inpainting(build_mask(cfg, sc.grid), build_image(cfg, sc.grid),
                                               cfg.reaction.m_bar);
    } else if (cfg.reaction.kind == "tumor") {
        sc.reaction = ReactionSpec::tumor(cfg.reaction.m, cfg.reaction.delta_n, sc.grid);
    }
    if (cfg.solver.model == "nonlocal") {
        if (cfg.kernel.kind != "gaussian") throw ConfigError("nonlocal model requires a kernel");
        sc.kernel = make_gaussian_kernel_with_mass(sc.grid, cfg.kernel.mass, cfg.kernel.sigma);
    }
    if (cfg.solver.g != "none") {
        if (cfg.solver.g.rfind("constant:", 0) == 0) {
            sc.g_field = ScalarField::constant(
                sc.grid, parse_double(cfg.solver.g.substr(9), "solver.g"));
        } else if (cfg.solver.g.rfind("file:", 0) == 0) {
            sc.g_field = read_snapshot(cfg.solver.g.substr(5)).first;
        } else {
            throw ConfigError("unknown g spec '" + cfg.solver.g + "'");
        }
    }
    sc.lambda = cfg.solver.lambda;
    sc.dt = cfg.solver.dt;
    sc.t_end = cfg.solver.t_end;
    sc.stabilization = cfg.solver.stabilization;
    sc.newton_tol = cfg.solver.newton_tol;
    sc.newton_max = cfg.solver.newton_max;
    sc.clip = cfg.solver.clip;
    sc.snapshot_stride = cfg.solver.snapshot_stride;
    return sc;
}

ScalarField build_initial_field(const ExperimentConfig& cfg) {
    const Grid grid{cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly};
    if (cfg.solver.ic == "pure_phase")
        return ScalarField::constant(grid, -1.0 + cfg.solver.lambda);
    SplitMix64 rng(cfg.solver.seed);
    ScalarField phi(grid);
    for (double& v : phi.values)
        v = cfg.solver.noise_mean + cfg.solver.noise_amplitude * rng.symmetric();
    return phi;
}

TumorConfig build_tumor_config(const ExperimentConfig& cfg) {
    if (cfg.reaction.kind != "tumor")
        throw ConfigError("tumor experiment requires reaction kind 'tumor'");
    TumorConfig tc;
    tc.base = build_solver_config(cfg);
    tc.chi = cfg.tumor.chi;
    tc.supply = cfg.tumor.supply;
    tc.consumption = cfg.tumor.consumption;
    tc.n_boundary = ScalarField::constant(tc.base.grid, cfg.tumor.n_boundary);
    tc.n0 = ScalarField::constant(tc.base.grid, cfg.tumor.n0);
    return tc;
}

} // namespace chsep
