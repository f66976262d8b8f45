#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chsep/field_ops.hpp"
#include "chsep/potential.hpp"
#include "chsep/reaction.hpp"

namespace chsep {

struct SolverConfig {
    Grid grid;
    SingularPotential pot = SingularPotential::flory_huggins(1.0, 2.0);
    std::optional<ReactionSpec> reaction; ///< absent: S = 0 (conservative flow)
    std::optional<KernelSpec> kernel;     ///< present: nonlocal model
    std::optional<ScalarField> g_field;   ///< time-constant source in the chemical potential
    double lambda = 1e-3;                 ///< pure-phase shift, must be in (0,1)
    double dt = 1e-3;
    double t_end = 1.0;
    double stabilization = 0.0; ///< extra implicit shift stab * Laplacian(phi^{n+1}-phi^n)
    double newton_tol = 1e-11;  ///< residual tolerance in continuum-normalized L2
    int newton_max = 50;
    double clip = 1e-9; ///< regularization window of beta
    int snapshot_stride = 100;
};

struct StepResult {
    ScalarField phi;
    ScalarField mu;
    int newton_iters = 0;
    double source_mean = 0.0; ///< (S(phi^n))_Omega used by this step
};

/// Per-step diagnostics plus decimated snapshots of one run.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> phi_min;
    std::vector<double> phi_max;
    std::vector<double> grad_mu_l2;
    std::vector<double> dist_h_to_init; ///< ||phi(t) - phi(0)||_{-1}

    std::vector<double> snapshot_times;
    std::vector<ScalarField> snapshots;

    /// max over steps of |mass^{n+1} - mass^n - dt*(S^n)_Omega|
    double max_mass_identity_error = 0.0;
    /// max over steps of energy increase (0 if monotone)
    double max_energy_increase = 0.0;
    int max_newton_iters = 0;
};

/// First-order convex-splitting IMEX steppers for the local flow
///   d_t phi = Lap(-Lap phi + F'(phi) + g) + S
/// and its nonlocal counterpart with a phi - K*phi in place of -Lap phi.
/// Implicit: the fourth-order (resp. a-diffusion) part and the monotone
/// beta; explicit: pi, the convolution, g and S. The reaction enters the
/// mean exactly: (phi^{n+1})_Omega - (phi^n)_Omega = dt (S^n)_Omega.
class ChSolver {
  public:
    explicit ChSolver(SolverConfig cfg);

    const SolverConfig& config() const { return cfg_; }
    bool nonlocal() const { return cfg_.kernel.has_value(); }

    StepResult step_local(const ScalarField& phi, double t);
    StepResult step_nonlocal(const ScalarField& phi, double t);
    /// Dispatches on the presence of a kernel.
    StepResult step(const ScalarField& phi, double t);

    /// Core step with externally supplied g and S fields (both optional);
    /// used by the tumor coupling where g = -chi*n changes every step.
    StepResult step_with(const ScalarField& phi, const ScalarField* g, const ScalarField* S);

    /// Pure-phase start phi(0) = -1 + lambda.
    Trajectory run();
    Trajectory run(const ScalarField& phi0);

    /// Free energy of the configured model (local or nonlocal) with the
    /// given source in the chemical potential.
    double energy(const ScalarField& phi, const ScalarField* g);

    SpectralOps& ops() { return ops_; }

  private:
    StepResult step_impl(const ScalarField& phi, const ScalarField* g, const ScalarField* S);
    const ScalarField* custom_source_arg() const;
    void record(Trajectory& traj, double t, const ScalarField& phi, const ScalarField& mu,
                const ScalarField& phi0);

    SolverConfig cfg_;
    SpectralOps ops_;
};

/// E = 1/2 ||grad phi||^2 + int F(phi) + int g phi.
double energy_local(const SingularPotential& pot, const ScalarField& phi,
                    const ScalarField* g = nullptr);

/// E = 1/4 intint K(x-y)|phi(x)-phi(y)|^2 + int F(phi) + int g phi, the
/// interaction term computed as 1/2 int a phi^2 - 1/2 int phi (K*phi).
double energy_nonlocal(const SingularPotential& pot, const KernelSpec& kernel,
                       const ScalarField& phi, const ScalarField* g = nullptr);

/// Columns: t, mass, energy, phi_min, phi_max, grad_mu_l2, dist_h_to_init.
void write_diagnostics_csv(const std::string& path, const Trajectory& traj);

} // namespace chsep
