#include "chsep/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "chsep/rng.hpp"

namespace chsep {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

ScalarField subtract(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    ScalarField out(a.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = a.values[i] - b.values[i];
    return out;
}

/// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw FitDegenerate("all abscissae coincide");
    return (n * sxy - sx * sy) / denom;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"oono", "inpainting", "spinodal", "tumor_local", "tumor_nonlocal"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg; // defaults: 128^2 grid on (2pi)^2, theta=1, theta0=2
    if (name == "oono") {
        cfg.reaction.kind = "oono";
        cfg.reaction.m = 1.0;
        cfg.reaction.c = 0.3;
        cfg.solver.t_end = 2.0;
        cfg.experiment.kind = "run";
        return cfg;
    }
    if (name == "inpainting") {
        cfg.reaction.kind = "inpainting";
        cfg.reaction.m_bar = 50.0;
        cfg.reaction.mask = "halfplane";
        cfg.reaction.image = "stripes";
        cfg.reaction.image_amplitude = 0.4;
        cfg.reaction.image_stripes = 4;
        cfg.solver.t_end = 0.5;
        cfg.experiment.kind = "run";
        return cfg;
    }
    if (name == "spinodal") {
        cfg.reaction.kind = "none";
        cfg.solver.ic = "noise";
        cfg.solver.noise_mean = 0.0;
        cfg.solver.noise_amplitude = 0.01;
        cfg.solver.seed = 42;
        cfg.solver.t_end = 2.0;
        cfg.solver.newton_tol = 1e-12;
        cfg.experiment.kind = "run";
        return cfg;
    }
    if (name == "tumor_local" || name == "tumor_nonlocal") {
        cfg.reaction.kind = "tumor";
        cfg.reaction.m = 1.0;
        cfg.reaction.delta_n = 0.2;
        cfg.tumor = {0.5, 1.0, 2.0, 1.0, 1.0};
        cfg.solver.t_end = 0.5;
        if (name == "tumor_nonlocal") {
            cfg.solver.model = "nonlocal";
            cfg.kernel.kind = "gaussian";
            cfg.kernel.sigma = 0.2;
            cfg.kernel.mass = 1.5;
        }
        cfg.experiment.kind = "run";
        return cfg;
    }
    throw UnknownPreset("no preset named '" + name + "'");
}

int worker_count(int requested, int jobs) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("CHSEP_THREADS")) n = std::atoi(env);
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return std::min(n, std::max(jobs, 1));
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    RunOutcome outcome;
    const bool is_tumor = cfg.reaction.kind == "tumor";

    if (is_tumor) {
        TumorSolver solver(build_tumor_config(cfg));
        auto [phi_traj, n_traj] = solver.run();
        outcome.phi = std::move(phi_traj);
        outcome.nutrient = std::move(n_traj);
    } else {
        ChSolver solver(build_solver_config(cfg));
        outcome.phi = solver.run(build_initial_field(cfg));
    }

    const bool has_reaction = cfg.reaction.kind != "none";
    outcome.mass_identity_ok =
        outcome.phi.max_mass_identity_error <= thresholds::kMassIdentity;
    if (!has_reaction) {
        outcome.conservation_drift =
            std::abs(outcome.phi.mass.back() - outcome.phi.mass.front());
        outcome.conservation_ok = outcome.conservation_drift <= thresholds::kConservation;
        if (cfg.solver.g == "none")
            outcome.energy_ok = outcome.phi.max_energy_increase <= thresholds::kEnergyIncrease;
    }
    if (has_reaction && cfg.solver.ic == "pure_phase") {
        // confinement applies to bound-verification runs, lambda < lambda0
        SolverConfig sc = build_solver_config(cfg);
        const MeanBounds bounds = MeanBounds::from(*sc.reaction, sc.lambda, sc.t_end);
        if (sc.lambda < bounds.lambda0) {
            outcome.confinement_checked = true;
            outcome.mean_report = verify_mean_confinement(
                outcome.phi.times, outcome.phi.mass, bounds,
                thresholds::kConfinementSlackSteps * sc.dt);
            outcome.confinement_ok = outcome.mean_report.ok();
        }
    }
    if (outcome.nutrient) {
        for (std::size_t i = 0; i < outcome.nutrient->times.size(); ++i) {
            if (outcome.nutrient->n_min[i] < -thresholds::kNutrientSlack ||
                outcome.nutrient->n_max[i] > 1.0 + thresholds::kNutrientSlack)
                outcome.nutrient_ok = false;
        }
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        std::ofstream cfg_out(dir / "config.ini", std::ios::binary);
        cfg_out << serialize_config(cfg);
        if (is_tumor) {
            write_diagnostics_csv((dir / "diagnostics_phi.csv").string(), outcome.phi);
            write_nutrient_csv((dir / "diagnostics_n.csv").string(), *outcome.nutrient);
        } else {
            write_diagnostics_csv((dir / "diagnostics.csv").string(), outcome.phi);
        }
        if (outcome.confinement_checked)
            write_mean_report_csv((dir / "mean_report.csv").string(), outcome.mean_report);
        for (std::size_t i = 0; i < outcome.phi.snapshots.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "snapshot_%04zu.txt", i);
            write_snapshot((dir / name).string(), outcome.phi.snapshots[i],
                           outcome.phi.snapshot_times[i]);
        }
        if (outcome.nutrient) {
            for (std::size_t i = 0; i < outcome.nutrient->snapshots.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "nutrient_%04zu.txt", i);
                write_snapshot((dir / name).string(), outcome.nutrient->snapshots[i],
                               outcome.nutrient->snapshot_times[i]);
            }
        }
    }
    return outcome;
}

LambdaSweepResult lambda_continuation(const ExperimentConfig& base,
                                      const std::vector<double>& lambdas, double t_probe,
                                      int threads) {
    if (lambdas.size() < 4) throw DomainError("lambda continuation needs at least 4 values");
    // repeated values are allowed through: they produce a zero gap, which
    // surfaces as FitDegenerate below
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
        if (lambdas[i] < lambdas[i + 1])
            throw DomainError("lambdas must be non-increasing");
    if (!(lambdas.front() < 1.0 && lambdas.back() > 0.0))
        throw DomainError("lambdas must lie in (0,1)");
    {
        SolverConfig probe = build_solver_config(base);
        if (probe.reaction) {
            const double lambda0 = 0.5 * probe.reaction->c0();
            if (!(lambdas.front() < lambda0))
                throw DomainError("lambdas must stay below lambda0 = c0/2");
        }
    }

    // fan the runs out to a small pool; results land by index
    std::vector<ScalarField> finals(lambdas.size());
    std::vector<double> identity_errors(lambdas.size(), 0.0);
    std::vector<double> abs_phi(lambdas.size(), 0.0);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int nworkers = worker_count(threads, static_cast<int>(lambdas.size()));
    for (int w = 0; w < nworkers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t j = next.fetch_add(1);
                if (j >= lambdas.size()) return;
                try {
                    ExperimentConfig cfg = base;
                    cfg.solver.lambda = lambdas[j];
                    cfg.solver.ic = "pure_phase";
                    cfg.solver.t_end = t_probe;
                    ChSolver solver(build_solver_config(cfg));
                    Trajectory traj = solver.run(build_initial_field(cfg));
                    identity_errors[j] = traj.max_mass_identity_error;
                    for (std::size_t i = 0; i < traj.times.size(); ++i)
                        abs_phi[j] = std::max(abs_phi[j], std::max(std::abs(traj.phi_min[i]),
                                                                   std::abs(traj.phi_max[i])));
                    finals[j] = std::move(traj.snapshots.back());
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    LambdaSweepResult result;
    result.lambdas = lambdas;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        result.max_mass_identity_error =
            std::max(result.max_mass_identity_error, identity_errors[j]);
        result.max_abs_phi = std::max(result.max_abs_phi, abs_phi[j]);
    }
    SpectralOps ops(finals.front().grid);
    for (std::size_t j = 0; j + 1 < lambdas.size(); ++j) {
        const double d = ops.hminus1_norm(subtract(finals[j], finals[j + 1]));
        if (d == 0.0) throw FitDegenerate("zero gap between consecutive lambda runs");
        result.distances.push_back(d);
    }

    // fit log d against log lambda; drop the smallest-lambda pair if its
    // gap sits at the solver noise floor
    std::vector<double> xs, ys;
    const double floor = 10.0 * base.solver.newton_tol;
    for (std::size_t j = 0; j < result.distances.size(); ++j) {
        if (j + 1 == result.distances.size() && result.distances[j] < floor &&
            result.distances.size() > 2)
            continue;
        xs.push_back(std::log(lambdas[j]));
        ys.push_back(std::log(result.distances[j]));
        result.fit_lambdas.push_back(lambdas[j]);
    }
    result.slope = ls_slope(xs, ys);
    result.slope_ok = result.slope >= thresholds::kSweepSlopeMin;
    return result;
}

CdepResult continuous_dependence_study(const ExperimentConfig& base, double lambda1,
                                       double lambda2, int probe_count) {
    if (probe_count < 2) throw DomainError("need at least 2 probe times");
    ExperimentConfig cfg1 = base, cfg2 = base;
    cfg1.solver.lambda = lambda1;
    cfg2.solver.lambda = lambda2;
    cfg1.solver.ic = cfg2.solver.ic = "pure_phase";
    SolverConfig sc1 = build_solver_config(cfg1);
    SolverConfig sc2 = build_solver_config(cfg2);
    if (sc1.reaction && !sc1.reaction->lipschitz() &&
        sc1.reaction->kind() == ReactionKind::Custom)
        throw DomainError("continuous dependence needs a Lipschitz source");

    ChSolver s1(sc1), s2(sc2);
    ScalarField phi1 = ScalarField::constant(sc1.grid, -1.0 + lambda1);
    ScalarField phi2 = ScalarField::constant(sc2.grid, -1.0 + lambda2);
    SpectralOps ops(sc1.grid);
    const bool nonlocal = sc1.kernel.has_value();

    CdepResult result;
    {
        const ScalarField d0 = subtract(phi2, phi1);
        const double hm = ops.hminus1_norm(d0);
        result.rhs0 = hm * hm + std::abs(mean(d0));
    }

    const long steps = std::lround(sc1.t_end / sc1.dt);
    double integral = 0.0;
    long next_probe = 1;
    double mass1 = mean(phi1), mass2 = mean(phi2);
    for (long k = 1; k <= steps; ++k) {
        const double t = k * sc1.dt;
        const StepResult r1 = s1.step(phi1, t - sc1.dt);
        const StepResult r2 = s2.step(phi2, t - sc2.dt);
        phi1 = r1.phi;
        phi2 = r2.phi;
        const double new1 = mean(phi1), new2 = mean(phi2);
        result.max_mass_identity_error =
            std::max({result.max_mass_identity_error,
                      std::abs(new1 - mass1 - sc1.dt * r1.source_mean),
                      std::abs(new2 - mass2 - sc2.dt * r2.source_mean)});
        mass1 = new1;
        mass2 = new2;
        result.max_abs_phi = std::max({result.max_abs_phi, max_abs(phi1), max_abs(phi2)});
        const ScalarField diff = subtract(phi2, phi1);
        // local theory integrates the V norm of the difference, the
        // nonlocal one only the L2 norm
        const double nrm = nonlocal ? ops.l2_norm(diff) : ops.h1_norm(diff);
        integral += sc1.dt * nrm * nrm;
        if (k == steps || k >= next_probe) {
            const double hm = ops.hminus1_norm(diff);
            const double lhs = hm * hm + std::abs(mean(diff)) + integral;
            const double ratio =
                result.rhs0 > 0.0 ? lhs / result.rhs0 : (lhs == 0.0 ? 0.0 : INFINITY);
            result.rows.push_back({t, lhs, ratio});
            next_probe += std::max(steps / probe_count, 1L);
        }
    }
    for (const CdepRow& row : result.rows) result.max_ratio = std::max(result.max_ratio, row.ratio);
    // strictly increasing ratio across the whole tail flags unbounded growth
    const std::size_t half = result.rows.size() / 2;
    bool increasing = result.rows.size() >= 2;
    for (std::size_t i = std::max<std::size_t>(half, 1); i < result.rows.size(); ++i)
        if (result.rows[i].ratio <= result.rows[i - 1].ratio) increasing = false;
    result.tail_monotone_increasing = increasing;
    return result;
}

IneqSweepResult inequality_sweep(const SingularPotential& pot, const std::vector<double>& deltas,
                                 int samples, std::uint64_t seed, double c_beta_scale) {
    IneqSweepResult result;
    for (double delta : deltas) {
        const SharpConstants c = sharp_constants(delta);
        SplitMix64 rng(seed);
        IneqDeltaResult row{delta, samples, 0, INFINITY};
        for (int i = 0; i < samples; ++i) {
            const double r = rng.uniform(-1.0 + 1e-15, 1.0);
            const double r0 = rng.uniform(-1.0 + 1e-15, -1.0 + delta);
            const InequalityCheck chk =
                check_sharp_inequality_with(pot, r, r0, delta, c_beta_scale * c.c_beta, c.C_beta);
            row.violations += !chk.holds;
            row.worst_slack = std::min(row.worst_slack, chk.rhs - chk.lhs);
        }
        result.total_violations += row.violations;
        result.per_delta.push_back(row);
    }
    return result;
}

void write_sweep_csv(const std::string& path, const LambdaSweepResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open sweep csv for writing: " + path);
    out << "lambda_hi,lambda_lo,distance\n";
    for (std::size_t j = 0; j < result.distances.size(); ++j)
        out << fmt(result.lambdas[j]) << ',' << fmt(result.lambdas[j + 1]) << ','
            << fmt(result.distances[j]) << '\n';
    if (!out.good()) throw Error("sweep csv write failed: " + path);
}

void write_cdep_csv(const std::string& path, const CdepResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open cdep csv for writing: " + path);
    out << "t,lhs,ratio\n";
    for (const CdepRow& row : result.rows)
        out << fmt(row.t) << ',' << fmt(row.lhs) << ',' << fmt(row.ratio) << '\n';
    if (!out.good()) throw Error("cdep csv write failed: " + path);
}

void write_ineq_csv(const std::string& path, const IneqSweepResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open ineq csv for writing: " + path);
    out << "delta,samples,violations,worst_slack\n";
    for (const IneqDeltaResult& row : result.per_delta)
        out << fmt(row.delta) << ',' << row.samples << ',' << row.violations << ','
            << fmt(row.worst_slack) << '\n';
    if (!out.good()) throw Error("ineq csv write failed: " + path);
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error("csv column not found: " + name);
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open csv: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty csv: " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.header.size()) throw Error("ragged csv row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace

VerifyResult verify_trajectory_dir(const std::string& dir) {
    VerifyResult result;
    auto fail = [&](const std::string& msg) {
        result.ok = false;
        result.messages.push_back("FAIL " + msg);
    };
    auto pass = [&](const std::string& msg) { result.messages.push_back("ok   " + msg); };

    const fs::path base(dir);
    const ExperimentConfig cfg = load_config_file((base / "config.ini").string());
    const bool is_tumor = cfg.reaction.kind == "tumor";
    const std::string diag_name = is_tumor ? "diagnostics_phi.csv" : "diagnostics.csv";
    const CsvTable diag = read_csv((base / diag_name).string());
    if (diag.rows.empty()) {
        fail("diagnostics file has no rows");
        return result;
    }
    const std::size_t ct = diag.column("t");
    const std::size_t cmass = diag.column("mass");
    const std::size_t cmin = diag.column("phi_min");
    const std::size_t cmax = diag.column("phi_max");
    const std::size_t cenergy = diag.column("energy");

    bool in_bounds = true;
    for (const auto& row : diag.rows)
        in_bounds &= (row[cmin] > -1.0 && row[cmax] < 1.0);
    in_bounds ? pass("pointwise |phi| < 1 at every recorded step")
              : fail("pointwise bound |phi| < 1 violated");

    if (cfg.reaction.kind == "none") {
        const double drift = std::abs(diag.rows.back()[cmass] - diag.rows.front()[cmass]);
        drift <= thresholds::kConservation
            ? pass("mass conserved, drift " + fmt(drift))
            : fail("mass drift " + fmt(drift) + " exceeds " + fmt(thresholds::kConservation));
        if (cfg.solver.g == "none") {
            double worst = 0.0;
            for (std::size_t i = 1; i < diag.rows.size(); ++i)
                worst = std::max(worst, diag.rows[i][cenergy] - diag.rows[i - 1][cenergy]);
            worst <= thresholds::kEnergyIncrease
                ? pass("energy nonincreasing, worst step " + fmt(worst))
                : fail("energy increased by " + fmt(worst));
        }
    }

    if (cfg.reaction.kind == "oono") {
        // the Oono mean closes, so the per-step identity is checkable from
        // the CSV alone: mass' = -m(mass - c)
        double worst = 0.0;
        for (std::size_t i = 1; i < diag.rows.size(); ++i) {
            const double tau = diag.rows[i][ct] - diag.rows[i - 1][ct];
            const double predicted =
                -cfg.reaction.m * (diag.rows[i - 1][cmass] - cfg.reaction.c);
            worst = std::max(worst, std::abs(diag.rows[i][cmass] - diag.rows[i - 1][cmass] -
                                             tau * predicted));
        }
        worst <= thresholds::kMassIdentity
            ? pass("Oono mean identity, worst step gap " + fmt(worst))
            : fail("Oono mean identity gap " + fmt(worst));
    }

    if (cfg.reaction.kind != "none" && cfg.solver.ic == "pure_phase") {
        const SolverConfig sc = build_solver_config(cfg);
        const MeanBounds bounds = MeanBounds::from(*sc.reaction, sc.lambda, sc.t_end);
        if (sc.lambda < bounds.lambda0) {
            std::vector<double> times, masses;
            for (const auto& row : diag.rows) {
                times.push_back(row[ct]);
                masses.push_back(row[cmass]);
            }
            const MeanReport report = verify_mean_confinement(
                times, masses, bounds, thresholds::kConfinementSlackSteps * sc.dt);
            report.ok() ? pass("mean confined within the envelope")
                        : fail(std::to_string(report.violation_count) +
                               " confinement violations");
        }
    }

    if (is_tumor) {
        const CsvTable ndiag = read_csv((base / "diagnostics_n.csv").string());
        const std::size_t nmin = ndiag.column("n_min");
        const std::size_t nmax = ndiag.column("n_max");
        bool n_ok = true;
        for (const auto& row : ndiag.rows)
            n_ok &= (row[nmin] >= -thresholds::kNutrientSlack &&
                     row[nmax] <= 1.0 + thresholds::kNutrientSlack);
        n_ok ? pass("nutrient confined to [0,1] within slack")
             : fail("nutrient left [0,1] beyond slack");
    }
    return result;
}

} // namespace chsep
