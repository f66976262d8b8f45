#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "chsep/experiments.hpp"

using namespace chsep;

namespace {

int report(const char* label, bool ok, const std::string& detail) {
    std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", label, detail.empty() ? "" : ": ",
                detail.c_str());
    return ok ? 0 : 1;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig cfg = load_config_file(config_path);
    const RunOutcome outcome = run_experiment(cfg, out_dir);
    int rc = 0;
    rc |= report("mass identity within 1e-13", outcome.mass_identity_ok,
                 "max gap " + num(outcome.phi.max_mass_identity_error));
    if (cfg.reaction.kind == "none") {
        rc |= report("mass conservation within 1e-12", outcome.conservation_ok,
                     "drift " + num(outcome.conservation_drift));
        if (cfg.solver.g == "none")
            rc |= report("energy nonincreasing", outcome.energy_ok,
                         "worst step " + num(outcome.phi.max_energy_increase));
    }
    if (outcome.confinement_checked)
        rc |= report("mean confinement", outcome.confinement_ok,
                     std::to_string(outcome.mean_report.violation_count) + " violations");
    if (outcome.nutrient) rc |= report("nutrient in [0,1]", outcome.nutrient_ok, "");
    std::printf("final mass %.12g, final energy %.12g, max Newton iters %d\n",
                outcome.phi.mass.back(), outcome.phi.energy.back(),
                outcome.phi.max_newton_iters);
    if (!out_dir.empty()) std::printf("outputs written to %s\n", out_dir.c_str());
    return rc;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads) {
    const ExperimentConfig cfg = load_config_file(config_path);
    const LambdaSweepResult result =
        lambda_continuation(cfg, cfg.experiment.lambdas, cfg.experiment.t_probe, threads);
    for (std::size_t j = 0; j < result.distances.size(); ++j)
        std::printf("lambda %.3g -> %.3g : distance %.6e\n", result.lambdas[j],
                    result.lambdas[j + 1], result.distances[j]);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_sweep_csv(out_dir + "/lambda_sweep.csv", result);
    }
    return report("continuation slope >= 0.45", result.slope_ok,
                  "fitted slope " + num(result.slope));
}

int cmd_cdep(const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig cfg = load_config_file(config_path);
    const CdepResult result = continuous_dependence_study(
        cfg, cfg.experiment.lambda1, cfg.experiment.lambda2, cfg.experiment.probe_count);
    std::printf("initial gap %.6e, max ratio %.6e\n", result.rhs0, result.max_ratio);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_cdep_csv(out_dir + "/cdep.csv", result);
    }
    return report("dependence ratio bounded", result.ok(),
                  "max " + num(result.max_ratio) +
                      (result.tail_monotone_increasing ? ", tail increasing" : ""));
}

int cmd_ineq(const std::string& config_path, bool self_test) {
    const ExperimentConfig cfg = load_config_file(config_path);
    const SingularPotential pot =
        SingularPotential::flory_huggins(cfg.potential.theta, cfg.potential.theta0);
    const double scale = self_test ? 100.0 : 1.0;
    const IneqSweepResult result = inequality_sweep(pot, cfg.experiment.deltas,
                                                    cfg.experiment.samples,
                                                    cfg.experiment.seed, scale);
    for (const IneqDeltaResult& row : result.per_delta)
        std::printf("delta %.4g: %d samples, %d violations, worst slack %.6e\n", row.delta,
                    row.samples, row.violations, row.worst_slack);
    if (self_test)
        return report("self-test detects corrupted constants", result.total_violations > 0,
                      std::to_string(result.total_violations) + " violations found");
    return report("sharp inequality holds on all samples", result.total_violations == 0, "");
}

int cmd_preset(const std::string& name, const std::string& emit_path) {
    const ExperimentConfig cfg = preset(name);
    const std::string text = serialize_config(cfg);
    if (emit_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(emit_path, std::ios::binary);
        if (!out) throw Error("cannot write " + emit_path);
        out << text;
        std::printf("wrote %s\n", emit_path.c_str());
    }
    return 0;
}

int cmd_verify(const std::string& dir) {
    const VerifyResult result = verify_trajectory_dir(dir);
    for (const std::string& msg : result.messages) std::printf("%s\n", msg.c_str());
    return report("trajectory checks", result.ok, "");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cahn-Hilliard flows with singular potential and reaction sources"};
    app.require_subcommand(1);

    std::string config_path, out_dir, name, emit_path, traj_dir;
    int threads = 0;
    bool self_test = false;

    CLI::App* run = app.add_subcommand("run", "run one configuration and check its invariants");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory");

    CLI::App* sweep = app.add_subcommand("sweep-lambda", "pure-phase continuation in lambda");
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--threads", threads, "worker pool size (default CHSEP_THREADS)");

    CLI::App* cdep = app.add_subcommand("cdep", "continuous-dependence study for two lambdas");
    cdep->add_option("config", config_path, "config file")->required();
    cdep->add_option("--out", out_dir, "output directory");

    CLI::App* ineq = app.add_subcommand("ineq", "seeded sweep of the sharp inequality");
    ineq->add_option("config", config_path, "config file")->required();
    ineq->add_flag("--self-test", self_test, "corrupt c_beta to prove violations are caught");

    CLI::App* preset_cmd = app.add_subcommand("preset", "print or write a named preset config");
    preset_cmd->add_option("name", name, "oono | inpainting | spinodal | tumor_local | tumor_nonlocal")
        ->required();
    preset_cmd->add_option("--emit", emit_path, "write to file instead of stdout");

    CLI::App* verify = app.add_subcommand("verify", "re-check a written trajectory directory");
    verify->add_option("dir", traj_dir, "directory with config.ini and diagnostics CSVs")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, threads);
        if (cdep->parsed()) return cmd_cdep(config_path, out_dir);
        if (ineq->parsed()) return cmd_ineq(config_path, self_test);
        if (preset_cmd->parsed()) return cmd_preset(name, emit_path);
        if (verify->parsed()) return cmd_verify(traj_dir);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
