#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chsep/config.hpp"
#include "chsep/mean_dynamics.hpp"

namespace chsep {

/// Thresholds shared by the CLI assertions and the acceptance suite.
namespace thresholds {
inline constexpr double kMassIdentity = 1e-13;
inline constexpr double kConservation = 1e-12;
inline constexpr double kEnergyIncrease = 1e-10;
inline constexpr double kConfinementSlackSteps = 5.0; ///< slack = 5*dt
inline constexpr double kSweepSlopeMin = 0.45;
inline constexpr double kCdepRatioMax = 1e6;
inline constexpr double kNutrientSlack = 1e-8;
} // namespace thresholds

/// Named, fully-populated default configurations:
/// oono, inpainting, spinodal, tumor_local, tumor_nonlocal.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Worker count for sweeps: flag value, else CHSEP_THREADS, else hardware,
/// always capped by the job count.
int worker_count(int requested, int jobs);

struct RunOutcome {
    Trajectory phi;
    std::optional<NutrientTrajectory> nutrient;
    MeanReport mean_report; ///< empty rows when confinement does not apply
    bool confinement_checked = false;
    bool mass_identity_ok = true;
    bool conservation_ok = true;
    double conservation_drift = 0.0;
    bool energy_ok = true;
    bool confinement_ok = true;
    bool nutrient_ok = true;
    bool ok() const {
        return mass_identity_ok && conservation_ok && energy_ok && confinement_ok && nutrient_ok;
    }
};

/// Runs the configured model and evaluates the run's own invariants
/// (mass identity, conservation/energy decay when S = 0, mean confinement
/// for pure-phase reaction runs, nutrient bounds). With a non-empty
/// out_dir also writes config.ini, diagnostics CSVs, mean_report.csv and
/// snapshots there.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir = "");

struct LambdaSweepResult {
    std::vector<double> lambdas;
    std::vector<double> distances; ///< pairwise, one fewer than lambdas
    std::vector<double> fit_lambdas;
    double slope = 0.0;
    bool slope_ok = false;
    double max_mass_identity_error = 0.0; ///< aggregated over the family
    double max_abs_phi = 0.0;
};

/// Runs the family at each lambda to t_probe, measures consecutive
/// H^{-1}-type gaps and fits the log-log slope against lambda. The initial
/// data differ by O(lambda), so the continuous-dependence bound predicts
/// gaps of order lambda^(1/2) or better.
LambdaSweepResult lambda_continuation(const ExperimentConfig& base,
                                      const std::vector<double>& lambdas, double t_probe,
                                      int threads = 0);

struct CdepRow {
    double t;
    double lhs;
    double ratio;
};

struct CdepResult {
    double rhs0 = 0.0;
    std::vector<CdepRow> rows;
    double max_ratio = 0.0;
    bool tail_monotone_increasing = false;
    double max_mass_identity_error = 0.0;
    double max_abs_phi = 0.0;
    bool ok() const {
        return max_ratio < thresholds::kCdepRatioMax && !tail_monotone_increasing;
    }
};

/// Advances two runs, differing only in lambda, in lockstep and tracks
///   LHS(t) = ||diff||_{-1}^2 + |mean diff| + int_0^t ||diff||^2 ds
/// (V norm in the local model, L2 in the nonlocal one) against the initial
/// gap RHS0. Boundedness of the ratio is the pass criterion.
CdepResult continuous_dependence_study(const ExperimentConfig& base, double lambda1,
                                       double lambda2, int probe_count);

struct IneqDeltaResult {
    double delta;
    int samples;
    int violations;
    double worst_slack; ///< min over samples of rhs - lhs
};

struct IneqSweepResult {
    std::vector<IneqDeltaResult> per_delta;
    int total_violations = 0;
};

/// Seeded sweep of the sharp inequality over the admissible (r, r0) region.
/// c_beta_scale != 1 corrupts the constant deliberately so the harness can
/// demonstrate it detects violations.
IneqSweepResult inequality_sweep(const SingularPotential& pot, const std::vector<double>& deltas,
                                 int samples, std::uint64_t seed, double c_beta_scale = 1.0);

void write_sweep_csv(const std::string& path, const LambdaSweepResult& result);
void write_cdep_csv(const std::string& path, const CdepResult& result);
void write_ineq_csv(const std::string& path, const IneqSweepResult& result);

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> messages;
};

/// Re-checks a written trajectory directory (config.ini + diagnostics
/// CSVs): pointwise bounds, confinement, conservation and energy decay
/// where applicable, and the mean identity for the Oono source whose mean
/// closes on CSV data alone.
VerifyResult verify_trajectory_dir(const std::string& dir);

} // namespace chsep
