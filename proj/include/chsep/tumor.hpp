#pragma once

#include <utility>

#include "chsep/ch_solver.hpp"

namespace chsep {

/// Coupled phase/nutrient configuration: Cahn-Hilliard (local or nonlocal)
/// with the tumor source S(phi,n) = -m phi + (n - delta_n)_+ h(phi),
/// chemotaxis g = -chi n, and the nutrient flow
///   d_t n - Lap n = supply*(n_boundary - n) - consumption*h(phi) n.
struct TumorConfig {
    SolverConfig base; ///< reaction must be the Tumor kind; base.g_field is ignored
    double chi = 0.0;
    double supply = 0.0;      ///< B
    double consumption = 0.0; ///< C
    ScalarField n_boundary;   ///< n_B in [0,1], constant or field
    ScalarField n0;           ///< initial nutrient in [0,1]
};

struct TumorStepResult {
    ScalarField phi;
    ScalarField n;
    ScalarField mu;
    int newton_iters = 0;
    double source_mean = 0.0;
};

struct NutrientTrajectory {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> n_min;
    std::vector<double> n_max;
    std::vector<double> snapshot_times;
    std::vector<ScalarField> snapshots;
};

class TumorSolver {
  public:
    explicit TumorSolver(TumorConfig cfg);

    const TumorConfig& config() const { return cfg_; }

    /// Nutrient first with implicit diffusion and explicit reaction, then
    /// the phase with the fresh n in both g and S.
    TumorStepResult step(const ScalarField& phi, const ScalarField& n, double t);

    /// Full evolution from (-1 + lambda, n0).
    std::pair<Trajectory, NutrientTrajectory> run();

  private:
    TumorConfig cfg_;
    ChSolver solver_;
};

/// Columns: t, mass, n_min, n_max.
void write_nutrient_csv(const std::string& path, const NutrientTrajectory& traj);

} // namespace chsep
