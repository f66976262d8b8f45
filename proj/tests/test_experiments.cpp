#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chsep/experiments.hpp"

using namespace chsep;

namespace {

/// shrink a preset to a cheap grid/horizon for unit testing
ExperimentConfig mini(const std::string& name, double t_end) {
    ExperimentConfig cfg = preset(name);
    cfg.grid.nx = cfg.grid.ny = 32;
    cfg.solver.t_end = t_end;
    cfg.kernel.sigma = 0.5; // keep the kernel resolved on the coarse grid
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("inequality sweep finds no violations with the certified constants") {
    const SingularPotential pot = SingularPotential::flory_huggins(1.0, 2.0);
    const IneqSweepResult result =
        inequality_sweep(pot, {0.1, 1.0 / 3.0, 0.9}, 2000, 42);
    CHECK(result.total_violations == 0);
    for (const IneqDeltaResult& row : result.per_delta) CHECK(row.worst_slack >= -1e-12);
}

TEST_CASE("inequality sweep detects corrupted constants") {
    const SingularPotential pot = SingularPotential::flory_huggins(1.0, 2.0);
    const IneqSweepResult result =
        inequality_sweep(pot, {1.0 / 3.0}, 5000, 42, /*c_beta_scale=*/100.0);
    CHECK(result.total_violations > 0);
}

TEST_CASE("run_experiment evaluates the embedded invariants") {
    SUBCASE("oono") {
        const RunOutcome out = run_experiment(mini("oono", 0.2));
        CHECK(out.ok());
        CHECK(out.confinement_checked);
        CHECK(out.mean_report.violation_count == 0);
    }
    SUBCASE("spinodal conserves and dissipates") {
        const RunOutcome out = run_experiment(mini("spinodal", 0.2));
        CHECK(out.ok());
        CHECK(out.conservation_drift <= 1e-12);
        CHECK(out.phi.max_energy_increase <= 1e-10);
        CHECK_FALSE(out.confinement_checked);
    }
    SUBCASE("inpainting stays confined") {
        const RunOutcome out = run_experiment(mini("inpainting", 0.1));
        CHECK(out.ok());
        CHECK(out.confinement_checked);
    }
    SUBCASE("tumor local") {
        const RunOutcome out = run_experiment(mini("tumor_local", 0.1));
        CHECK(out.ok());
        REQUIRE(out.nutrient.has_value());
        CHECK(out.nutrient_ok);
    }
}

TEST_CASE("run_experiment writes the trajectory directory and verify accepts it") {
    const std::string dir = "exp_out_test";
    std::filesystem::remove_all(dir);
    const RunOutcome out = run_experiment(mini("oono", 0.1), dir);
    CHECK(out.ok());
    CHECK(std::filesystem::exists(dir + "/config.ini"));
    CHECK(std::filesystem::exists(dir + "/diagnostics.csv"));
    CHECK(std::filesystem::exists(dir + "/mean_report.csv"));
    CHECK(std::filesystem::exists(dir + "/snapshot_0000.txt"));

    const VerifyResult verdict = verify_trajectory_dir(dir);
    for (const std::string& msg : verdict.messages) INFO(msg);
    CHECK(verdict.ok);
    std::filesystem::remove_all(dir);
}

TEST_CASE("identical config runs are bit-identical") {
    const std::string d1 = "det_a", d2 = "det_b";
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
    const ExperimentConfig cfg = mini("spinodal", 0.05);
    run_experiment(cfg, d1);
    run_experiment(cfg, d2);
    CHECK(slurp(d1 + "/diagnostics.csv") == slurp(d2 + "/diagnostics.csv"));
    CHECK(slurp(d1 + "/snapshot_0001.txt") == slurp(d2 + "/snapshot_0001.txt"));
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

TEST_CASE("lambda continuation") {
    const ExperimentConfig base = mini("oono", 0.1);
    const std::vector<double> lambdas = {1e-1, 1e-2, 1e-3, 1e-4};

    SUBCASE("slope certifies the continuation rate") {
        const LambdaSweepResult result = lambda_continuation(base, lambdas, 0.1, 2);
        CHECK(result.distances.size() == 3);
        for (double d : result.distances) CHECK(d > 0.0);
        CHECK(result.slope >= 0.45);
        CHECK(result.slope_ok);
        // pool size must not change the numbers
        const LambdaSweepResult serial = lambda_continuation(base, lambdas, 0.1, 1);
        CHECK(serial.distances == result.distances);
        CHECK(serial.slope == result.slope);
    }

    SUBCASE("repeated lambda degenerates the fit") {
        CHECK_THROWS_AS(lambda_continuation(base, {1e-1, 1e-2, 1e-2, 1e-3}, 0.1, 1),
                        FitDegenerate); // identical runs, zero gap
        CHECK_THROWS_AS(lambda_continuation(base, {1e-3, 1e-2, 1e-1, 0.2}, 0.1, 1),
                        DomainError); // increasing order rejected outright
    }

    SUBCASE("needs at least four lambdas below lambda0") {
        CHECK_THROWS_AS(lambda_continuation(base, {1e-1, 1e-2, 1e-3}, 0.1, 1), DomainError);
        CHECK_THROWS_AS(lambda_continuation(base, {0.9, 1e-2, 1e-3, 1e-4}, 0.1, 1),
                        DomainError); // 0.9 >= lambda0 = 0.35
    }

    SUBCASE("nonlocal model meets the same slope criterion") {
        ExperimentConfig cfg = base;
        cfg.solver.model = "nonlocal";
        cfg.kernel.kind = "gaussian";
        const LambdaSweepResult result = lambda_continuation(cfg, lambdas, 0.1, 2);
        CHECK(result.slope >= 0.45);
    }
}

TEST_CASE("continuous dependence stays bounded") {
    const ExperimentConfig base = mini("oono", 0.25);

    const CdepResult result = continuous_dependence_study(base, 1e-2, 2e-2, 10);
    CHECK(result.rhs0 > 0.0);
    CHECK(result.max_ratio < 1e6);
    CHECK_FALSE(result.tail_monotone_increasing);
    CHECK(result.ok());

    // identical lambdas: trajectories coincide bitwise, so LHS is exactly 0
    const CdepResult same = continuous_dependence_study(base, 1e-2, 1e-2, 5);
    for (const CdepRow& row : same.rows) CHECK(row.lhs == 0.0);

    // swapping the pair changes nothing (norms of the signed difference)
    const CdepResult swapped = continuous_dependence_study(base, 2e-2, 1e-2, 10);
    REQUIRE(swapped.rows.size() == result.rows.size());
    for (std::size_t i = 0; i < result.rows.size(); ++i)
        CHECK(swapped.rows[i].lhs == result.rows[i].lhs);

    // nonlocal variant integrates the L2 norm instead of the V norm
    ExperimentConfig noncfg = base;
    noncfg.solver.model = "nonlocal";
    noncfg.kernel.kind = "gaussian";
    const CdepResult nonlocal = continuous_dependence_study(noncfg, 1e-2, 2e-2, 10);
    CHECK(nonlocal.ok());
    CHECK(nonlocal.max_ratio < 1e6);
}

TEST_CASE("worker pool sizing") {
    CHECK(worker_count(3, 8) == 3);
    CHECK(worker_count(16, 4) == 4);
    CHECK(worker_count(0, 1) == 1);
}
