#include "chsep/tumor.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace chsep {

namespace {

void require_unit_range(const ScalarField& v, const char* what) {
    if (min_value(v) < -1e-12 || max_value(v) > 1.0 + 1e-12)
        throw DomainError(std::string(what) + " must take values in [0,1]");
}

} // namespace

TumorSolver::TumorSolver(TumorConfig cfg) : cfg_(std::move(cfg)), solver_([&] {
    SolverConfig base = cfg_.base;
    base.g_field.reset(); // g is rebuilt from the nutrient every step
    return base;
}()) {
    if (!cfg_.base.reaction || cfg_.base.reaction->kind() != ReactionKind::Tumor)
        throw CompatibilityError("tumor solver requires the Tumor reaction kind");
    if (!(cfg_.chi >= 0.0 && cfg_.supply >= 0.0 && cfg_.consumption >= 0.0))
        throw DomainError("chi, supply, consumption must be nonnegative");
    if (!(cfg_.n0.grid == cfg_.base.grid) || !(cfg_.n_boundary.grid == cfg_.base.grid))
        throw GridMismatch("nutrient fields must live on the solver grid");
    require_unit_range(cfg_.n0, "n0");
    require_unit_range(cfg_.n_boundary, "n_boundary");
    // discrete maximum principle for the nutrient update
    if (!(cfg_.base.dt * cfg_.supply <= 1.0 && cfg_.base.dt * cfg_.consumption <= 1.0))
        throw DomainError("need dt*supply <= 1 and dt*consumption <= 1");
}

TumorStepResult TumorSolver::step(const ScalarField& phi, const ScalarField& n, double) {
    require_same_grid(phi, n);
    if (min_value(n) < -1e-10 || max_value(n) > 1.0 + 1e-10)
        throw NutrientBoundsBreached("nutrient outside [0,1] beyond slack at step entry");

    const double tau = cfg_.base.dt;
    const std::size_t size = phi.values.size();

    // (I - tau*Lap) n^{k+1} = n + tau*[B(n_B - n) - C*h(phi) n]
    ScalarField rhs(cfg_.base.grid);
    for (std::size_t i = 0; i < size; ++i) {
        const double h = truncation_h(phi.values[i]);
        rhs.values[i] = n.values[i] +
                        tau * (cfg_.supply * (cfg_.n_boundary.values[i] - n.values[i]) -
                               cfg_.consumption * h * n.values[i]);
    }
    SpectralOps& ops = solver_.ops();
    Spectrum s;
    ops.forward(rhs, s);
    const std::vector<double>& k2 = ops.k_squared();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] /= 1.0 + tau * k2[i];
    ScalarField n_next;
    ops.backward(s, n_next);

    if (min_value(n_next) < -1e-8 || max_value(n_next) > 1.0 + 1e-8)
        throw NutrientBoundsBreached("nutrient left [0,1] beyond the 1e-8 slack");

    // phase step with the fresh nutrient in both the source and g = -chi n
    ScalarField g(cfg_.base.grid);
    for (std::size_t i = 0; i < size; ++i) g.values[i] = -cfg_.chi * n_next.values[i];
    ScalarField S = cfg_.base.reaction->eval(phi, &n_next);

    StepResult phase = solver_.step_with(phi, &g, &S);

    TumorStepResult out;
    out.phi = std::move(phase.phi);
    out.n = std::move(n_next);
    out.mu = std::move(phase.mu);
    out.newton_iters = phase.newton_iters;
    out.source_mean = phase.source_mean;
    return out;
}

std::pair<Trajectory, NutrientTrajectory> TumorSolver::run() {
    const SolverConfig& base = cfg_.base;
    const long steps = std::lround(base.t_end / base.dt);
    if (steps < 1) throw DomainError("t_end shorter than one step");

    ScalarField phi = ScalarField::constant(base.grid, -1.0 + base.lambda);
    ScalarField n = cfg_.n0;
    const ScalarField phi0 = phi;
    SpectralOps& ops = solver_.ops();

    Trajectory traj;
    NutrientTrajectory ntraj;
    auto record_n = [&](double t) {
        ntraj.times.push_back(t);
        ntraj.mass.push_back(mean(n));
        ntraj.n_min.push_back(min_value(n));
        ntraj.n_max.push_back(max_value(n));
    };
    auto record_phi = [&](double t, const ScalarField& mu) {
        traj.times.push_back(t);
        traj.mass.push_back(mean(phi));
        ScalarField g(base.grid);
        for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = -cfg_.chi * n.values[i];
        traj.energy.push_back(solver_.energy(phi, &g));
        traj.phi_min.push_back(min_value(phi));
        traj.phi_max.push_back(max_value(phi));
        traj.grad_mu_l2.push_back(ops.grad_l2_norm(mu));
        if (traj.times.size() == 1) {
            traj.dist_h_to_init.push_back(0.0);
        } else {
            ScalarField diff(base.grid);
            for (std::size_t i = 0; i < diff.values.size(); ++i)
                diff.values[i] = phi.values[i] - phi0.values[i];
            traj.dist_h_to_init.push_back(ops.hminus1_norm(diff));
        }
    };

    {
        // instantaneous chemical potential of the uniform start: the
        // diffusion part vanishes, only F' and the chemotaxis term remain
        ScalarField mu0(base.grid);
        for (std::size_t i = 0; i < mu0.values.size(); ++i)
            mu0.values[i] = base.pot.beta_reg(phi.values[i], base.clip) +
                            base.pot.pi(phi.values[i]) - cfg_.chi * n.values[i];
        record_phi(0.0, mu0);
    }
    record_n(0.0);
    traj.snapshot_times.push_back(0.0);
    traj.snapshots.push_back(phi);
    ntraj.snapshot_times.push_back(0.0);
    ntraj.snapshots.push_back(n);

    double prev_mass = traj.mass.front();
    double prev_energy = traj.energy.front();
    for (long step_idx = 1; step_idx <= steps; ++step_idx) {
        const double t = step_idx * base.dt;
        TumorStepResult res;
        try {
            res = step(phi, n, t - base.dt);
        } catch (const NewtonDiverged& e) {
            throw NewtonDiverged(std::string(e.what()) + " at t = " + std::to_string(t));
        } catch (const BoundsBreached& e) {
            throw BoundsBreached(std::string(e.what()) + " at t = " + std::to_string(t));
        } catch (const NutrientBoundsBreached& e) {
            throw NutrientBoundsBreached(std::string(e.what()) + " at t = " + std::to_string(t));
        }
        phi = std::move(res.phi);
        n = std::move(res.n);
        record_phi(t, res.mu);
        record_n(t);

        const double identity_gap =
            std::abs(traj.mass.back() - prev_mass - base.dt * res.source_mean);
        traj.max_mass_identity_error = std::max(traj.max_mass_identity_error, identity_gap);
        traj.max_energy_increase =
            std::max(traj.max_energy_increase, traj.energy.back() - prev_energy);
        traj.max_newton_iters = std::max(traj.max_newton_iters, res.newton_iters);
        prev_mass = traj.mass.back();
        prev_energy = traj.energy.back();

        if (step_idx % base.snapshot_stride == 0 || step_idx == steps) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(phi);
            ntraj.snapshot_times.push_back(t);
            ntraj.snapshots.push_back(n);
        }
    }
    return {std::move(traj), std::move(ntraj)};
}

void write_nutrient_csv(const std::string& path, const NutrientTrajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open nutrient diagnostics for writing: " + path);
    out << "t,mass,n_min,n_max\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
        out.put(sep);
    };
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        put(traj.times[i], ',');
        put(traj.mass[i], ',');
        put(traj.n_min[i], ',');
        put(traj.n_max[i], '\n');
    }
    if (!out.good()) throw Error("nutrient diagnostics write failed: " + path);
}

} // namespace chsep
