#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chsep/ch_solver.hpp"
#include "chsep/tumor.hpp"

namespace chsep {

/// Structured-text run configuration. Sections [grid], [potential],
/// [reaction], [kernel], [solver], [tumor], [experiment]; `key = value`
/// lines, `#` comments. Unknown sections or keys are errors. Serialization
/// is canonical: fixed ordering, shortest round-trip number formatting,
/// only the keys meaningful for the active kinds.
struct ExperimentConfig {
    struct GridSection {
        int nx = 128;
        int ny = 128;
        double lx = 6.283185307179586;
        double ly = 6.283185307179586;
    } grid;

    struct PotentialSection {
        std::string kind = "flory_huggins";
        double theta = 1.0;
        double theta0 = 2.0;
    } potential;

    struct ReactionSection {
        std::string kind = "none"; // none | oono | inpainting | tumor
        double m = 1.0;            // oono, tumor
        double c = 0.0;            // oono
        double m_bar = 50.0;       // inpainting
        std::string mask = "halfplane";
        std::string image = "stripes"; // stripes | constant | file:<path>
        double image_amplitude = 0.4;
        int image_stripes = 4;
        double delta_n = 0.2; // tumor
    } reaction;

    struct KernelSection {
        std::string kind = "none"; // none | gaussian
        double sigma = 0.2;
        double mass = 1.5;
    } kernel;

    struct SolverSection {
        std::string model = "local"; // local | nonlocal
        double lambda = 1e-3;
        double dt = 1e-3;
        double t_end = 1.0;
        double stabilization = 0.0;
        double newton_tol = 1e-11;
        int newton_max = 50;
        double clip = 1e-9;
        int snapshot_stride = 100;
        std::string ic = "pure_phase"; // pure_phase | noise
        double noise_mean = 0.0;
        double noise_amplitude = 0.01;
        std::uint64_t seed = 42;
        std::string g = "none"; // none | constant:<value> | file:<path>
    } solver;

    struct TumorSection {
        double chi = 0.5;
        double supply = 1.0;
        double consumption = 2.0;
        double n_boundary = 1.0;
        double n0 = 1.0;
    } tumor;

    struct ExperimentSection {
        std::string kind = "run"; // run | sweep_lambda | cdep | ineq
        std::vector<double> lambdas = {1e-1, 1e-2, 1e-3, 1e-4};
        double t_probe = 0.5;
        double lambda1 = 1e-2;
        double lambda2 = 2e-2;
        int probe_count = 20;
        std::vector<double> deltas = {0.1, 1.0 / 3.0, 0.9};
        int samples = 10000;
        std::uint64_t seed = 42;
    } experiment;
};

ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

/// Resolves the sections into a runnable SolverConfig (potential, reaction,
/// kernel, g). Masks and images come from the built-in generators or from
/// snapshot files ("file:<path>").
SolverConfig build_solver_config(const ExperimentConfig& cfg);

/// Initial phase field: the pure-phase shift -1+lambda, or seeded noise.
ScalarField build_initial_field(const ExperimentConfig& cfg);

TumorConfig build_tumor_config(const ExperimentConfig& cfg);

} // namespace chsep
