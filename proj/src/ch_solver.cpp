#include "chsep/ch_solver.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace chsep {

namespace {

double kahan_mean(const std::vector<double>& xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(xs.size());
}

} // namespace

ChSolver::ChSolver(SolverConfig cfg) : cfg_(std::move(cfg)), ops_(cfg_.grid) {
    if (!(cfg_.lambda > 0.0 && cfg_.lambda < 1.0))
        throw DomainError("lambda must lie in (0,1); beta is undefined at the pure phase");
    if (!(cfg_.dt > 0.0)) throw DomainError("dt must be positive");
    if (!(cfg_.t_end > 0.0)) throw DomainError("t_end must be positive");
    if (!(cfg_.clip > 0.0 && cfg_.clip < 1.0)) throw DomainError("clip must lie in (0,1)");
    if (!(cfg_.newton_tol > 0.0) || cfg_.newton_max < 1)
        throw DomainError("invalid Newton parameters");
    if (!(cfg_.stabilization >= 0.0)) throw DomainError("stabilization must be >= 0");
    if (cfg_.snapshot_stride < 1) throw DomainError("snapshot_stride must be >= 1");
    if (cfg_.reaction) {
        if (!(cfg_.reaction->m_field().grid == cfg_.grid))
            throw GridMismatch("reaction grid does not match solver grid");
        // One explicit step may not move the mean past the envelope.
        const double sup_source = cfg_.reaction->m_sup() + cfg_.reaction->h_bound();
        if (!(cfg_.dt * sup_source < 1.0))
            throw DomainError("dt * sup|S| must be < 1");
    }
    if (cfg_.kernel) {
        if (!(cfg_.kernel->grid == cfg_.grid))
            throw GridMismatch("kernel grid does not match solver grid");
        if (cfg_.pot.kind() == PotentialKind::FloryHuggins &&
            !(coercivity_margin(cfg_.pot, cfg_.kernel->a_star) > 0.0))
            throw CoercivityViolated("a_* + F'' is not uniformly positive for this kernel");
    }
    if (cfg_.g_field && !(cfg_.g_field->grid == cfg_.grid))
        throw GridMismatch("g field grid does not match solver grid");
}

StepResult ChSolver::step_local(const ScalarField& phi, double) {
    if (nonlocal()) throw DomainError("solver configured as nonlocal");
    ScalarField S;
    const ScalarField* Sp = nullptr;
    if (cfg_.reaction) {
        S = cfg_.reaction->eval(phi, custom_source_arg());
        Sp = &S;
    }
    return step_impl(phi, cfg_.g_field ? &*cfg_.g_field : nullptr, Sp);
}

StepResult ChSolver::step_nonlocal(const ScalarField& phi, double) {
    if (!nonlocal()) throw DomainError("solver configured as local");
    ScalarField S;
    const ScalarField* Sp = nullptr;
    if (cfg_.reaction) {
        S = cfg_.reaction->eval(phi, custom_source_arg());
        Sp = &S;
    }
    return step_impl(phi, cfg_.g_field ? &*cfg_.g_field : nullptr, Sp);
}

// A g-dependent custom h sees the configured time-constant g; the tumor
// coupling supplies its nutrient through step_with instead.
const ScalarField* ChSolver::custom_source_arg() const {
    if (cfg_.reaction->kind() == ReactionKind::Custom && cfg_.g_field)
        return &*cfg_.g_field;
    return nullptr;
}

StepResult ChSolver::step(const ScalarField& phi, double t) {
    return nonlocal() ? step_nonlocal(phi, t) : step_local(phi, t);
}

StepResult ChSolver::step_with(const ScalarField& phi, const ScalarField* g,
                               const ScalarField* S) {
    return step_impl(phi, g, S);
}

// One IMEX step. With tau = dt the update solves
//   u + tau*[Lap^2 u - stab*Lap u - Lap beta_reg(u)]
//     = phi + tau*[-stab*Lap phi + Lap(pi(phi) + g - K*phi) + S]
// (the Lap^2 term becomes a*(-Lap) in the nonlocal model, and K*phi is
// absent in the local one). The monotone beta is the only nonlinearity;
// the iteration is a preconditioned Newton with the constant-coefficient
// spectral operator P = L + tau*mean(beta')*k^2 and halving damping on
// residual increase.
StepResult ChSolver::step_impl(const ScalarField& phi, const ScalarField* g,
                               const ScalarField* S) {
    if (!(phi.grid == cfg_.grid)) throw GridMismatch("state grid does not match solver grid");
    if (g && !(g->grid == cfg_.grid)) throw GridMismatch("g field on wrong grid");
    if (S && !(S->grid == cfg_.grid)) throw GridMismatch("source field on wrong grid");
    if (max_abs(phi) >= 1.0)
        throw BoundsBreached("step entered with |phi| >= 1");

    const double tau = cfg_.dt;
    const double stab = cfg_.stabilization;
    const std::size_t nspec = ops_.spectrum_size();
    const std::vector<double>& k2 = ops_.k_squared();
    const std::size_t n = cfg_.grid.size();

    Spectrum phihat;
    ops_.forward(phi, phihat);

    // Explicit chemical-potential part pi(phi) + g (- K*phi nonlocally).
    ScalarField expl(cfg_.grid);
    for (std::size_t i = 0; i < n; ++i) {
        double v = cfg_.pot.pi(phi.values[i]);
        if (g) v += g->values[i];
        expl.values[i] = v;
    }
    Spectrum explhat;
    ops_.forward(expl, explhat);
    if (nonlocal()) {
        const Spectrum& khat = cfg_.kernel->khat;
        for (std::size_t i = 0; i < nspec; ++i) explhat[i] -= khat[i] * phihat[i];
    }

    Spectrum shat;
    double source_mean = 0.0;
    if (S) {
        ops_.forward(*S, shat);
        source_mean = kahan_mean(S->values);
    }

    // Implicit multiplier L(k) and right-hand side.
    std::vector<double> Lk(nspec);
    const double a_const = nonlocal() ? cfg_.kernel->a_const : 0.0;
    for (std::size_t i = 0; i < nspec; ++i) {
        const double diff = nonlocal() ? a_const * k2[i] : k2[i] * k2[i];
        Lk[i] = 1.0 + tau * diff + tau * stab * k2[i];
    }
    Spectrum rhshat(nspec);
    for (std::size_t i = 0; i < nspec; ++i) {
        std::complex<double> r = phihat[i] * (1.0 + tau * stab * k2[i]);
        r -= tau * k2[i] * explhat[i];
        if (S) r += tau * shat[i];
        rhshat[i] = r;
    }

    // Constant-coefficient preconditioner with the spatially averaged slope
    // of beta_reg at the step's starting state.
    double bbar_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        bbar_sum += cfg_.pot.beta_reg_prime(phi.values[i], cfg_.clip);
    const double bbar = bbar_sum / static_cast<double>(n);
    std::vector<double> Pk(nspec);
    for (std::size_t i = 0; i < nspec; ++i) Pk[i] = Lk[i] + tau * bbar * k2[i];

    const double norm_factor = cfg_.grid.area() / (static_cast<double>(n) * n);
    const int nyh = cfg_.grid.ny / 2 + 1;
    // Hermitian column weights and the 1/k^2 weight of the H^{-1} inner
    // product in which the Jacobian is symmetric positive definite.
    std::vector<double> wcol(nspec), winv(nspec);
    for (int ix = 0; ix < cfg_.grid.nx; ++ix) {
        for (int jy = 0; jy < nyh; ++jy) {
            const std::size_t i = static_cast<std::size_t>(ix) * nyh + jy;
            wcol[i] = ops_.column_weight(jy);
            winv[i] = k2[i] > 0.0 ? 1.0 / k2[i] : 0.0;
        }
    }
    auto dot_hm1 = [&](const Spectrum& a, const Spectrum& b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < nspec; ++i)
            sum += wcol[i] * winv[i] *
                   (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
        return sum;
    };

    auto residual = [&](const Spectrum& uhat, const ScalarField& u, Spectrum& rhat) {
        ScalarField beta_u(cfg_.grid);
        for (std::size_t i = 0; i < n; ++i)
            beta_u.values[i] = cfg_.pot.beta_reg(u.values[i], cfg_.clip);
        Spectrum betahat;
        ops_.forward(beta_u, betahat);
        rhat.resize(nspec);
        double sum = 0.0;
        for (std::size_t i = 0; i < nspec; ++i) {
            rhat[i] = uhat[i] * Lk[i] + tau * k2[i] * betahat[i] - rhshat[i];
            sum += wcol[i] * std::norm(rhat[i]);
        }
        return std::sqrt(sum * norm_factor);
    };

    // J v = v * L(k) + tau * k^2 * FFT(beta'(u) v)
    ScalarField bprime(cfg_.grid);
    auto apply_jacobian = [&](const Spectrum& vhat, Spectrum& out) {
        ScalarField v;
        ops_.backward(vhat, v);
        for (std::size_t i = 0; i < n; ++i) v.values[i] *= bprime.values[i];
        ops_.forward(v, out);
        for (std::size_t i = 0; i < nspec; ++i)
            out[i] = vhat[i] * Lk[i] + tau * k2[i] * out[i];
    };

    // Preconditioned CG for J d = r on the zero-mean modes (the k = 0
    // component of the update is handled exactly by pinning afterwards).
    Spectrum pcg_r, pcg_z, pcg_p, pcg_jp;
    auto solve_direction = [&](const Spectrum& rhat, Spectrum& dhat) {
        dhat.assign(nspec, std::complex<double>(0.0));
        dhat[0] = rhat[0]; // zero mode: J acts as the identity there
        pcg_r = rhat;
        pcg_z.resize(nspec);
        for (std::size_t i = 0; i < nspec; ++i) pcg_z[i] = pcg_r[i] / Pk[i];
        pcg_p = pcg_z;
        double rz = dot_hm1(pcg_r, pcg_z);
        const double rz0 = rz;
        if (rz0 <= 0.0) return;
        constexpr double kInnerRelTol = 1e-8; // squared in the rz measure
        constexpr int kInnerMax = 400;
        for (int it = 0; it < kInnerMax && rz > kInnerRelTol * rz0; ++it) {
            apply_jacobian(pcg_p, pcg_jp);
            const double pJp = dot_hm1(pcg_jp, pcg_p);
            if (pJp <= 0.0) break;
            const double alpha = rz / pJp;
            for (std::size_t i = 0; i < nspec; ++i) {
                dhat[i] += alpha * pcg_p[i];
                pcg_r[i] -= alpha * pcg_jp[i];
            }
            for (std::size_t i = 0; i < nspec; ++i) pcg_z[i] = pcg_r[i] / Pk[i];
            const double rz_next = dot_hm1(pcg_r, pcg_z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < nspec; ++i) pcg_p[i] = pcg_z[i] + beta * pcg_p[i];
        }
        dhat[0] = rhat[0]; // keep the zero mode exact regardless of PCG noise
    };

    Spectrum uhat = phihat;
    ScalarField u = phi;
    Spectrum rhat, dhat, trial_rhat, trial_uhat;
    ScalarField trial_u;
    double rnorm = residual(uhat, u, rhat);
    int iters = 1;
    while (rnorm > cfg_.newton_tol) {
        if (iters >= cfg_.newton_max)
            throw NewtonDiverged("Newton failed to reach tolerance in " +
                                 std::to_string(cfg_.newton_max) + " iterations");
        for (std::size_t i = 0; i < n; ++i)
            bprime.values[i] = cfg_.pot.beta_reg_prime(u.values[i], cfg_.clip);
        solve_direction(rhat, dhat);
        bool accepted = false;
        double alpha = 1.0;
        for (int attempt = 0; attempt < 6; ++attempt, alpha *= 0.5) {
            trial_uhat = uhat;
            for (std::size_t i = 0; i < nspec; ++i) trial_uhat[i] -= alpha * dhat[i];
            ops_.backward(trial_uhat, trial_u);
            const double trial_norm = residual(trial_uhat, trial_u, trial_rhat);
            if (trial_norm < rnorm || trial_norm <= cfg_.newton_tol) {
                uhat.swap(trial_uhat);
                u = trial_u;
                rhat.swap(trial_rhat);
                rnorm = trial_norm;
                accepted = true;
                break;
            }
        }
        ++iters;
        if (!accepted)
            throw NewtonDiverged("residual would not decrease even with damping 1/32");
    }

    // Pin the zero mode to its closed-form value: the mean evolves exactly by
    // dt*(S)_Omega, independent of the Newton tolerance.
    uhat[0] = rhshat[0];
    ops_.backward(uhat, u);

    if (max_abs(u) >= 1.0)
        throw BoundsBreached("|phi| reached 1 after the step (reduce dt or clip)");

    // Chemical potential of the step: implicit part at u, explicit at phi.
    // mu = -Lap u + beta_reg(u) + pi(phi) + g            (local)
    // mu = a u - K*phi + beta_reg(u) + pi(phi) + g       (nonlocal)
    Spectrum muhat(nspec);
    for (std::size_t i = 0; i < nspec; ++i) {
        muhat[i] = explhat[i];
        if (!nonlocal()) muhat[i] += k2[i] * uhat[i];
    }
    ScalarField mu;
    ops_.backward(muhat, mu);
    for (std::size_t i = 0; i < n; ++i) {
        mu.values[i] += cfg_.pot.beta_reg(u.values[i], cfg_.clip);
        if (nonlocal()) mu.values[i] += a_const * u.values[i];
    }

    StepResult result;
    result.phi = std::move(u);
    result.mu = std::move(mu);
    result.newton_iters = iters;
    result.source_mean = source_mean;
    return result;
}

double ChSolver::energy(const ScalarField& phi, const ScalarField* g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        sum += cfg_.pot.F(phi.values[i]);
        if (g) sum += g->values[i] * phi.values[i];
    }
    if (nonlocal()) {
        const ScalarField conv = ops_.convolve(*cfg_.kernel, phi);
        double interaction = 0.0;
        for (std::size_t i = 0; i < phi.values.size(); ++i) {
            const double p = phi.values[i];
            interaction += p * (cfg_.kernel->a_const * p - conv.values[i]);
        }
        return (0.5 * interaction + sum) * cfg_.grid.cell_area();
    }
    const double grad = ops_.grad_l2_norm(phi);
    return 0.5 * grad * grad + sum * cfg_.grid.cell_area();
}

void ChSolver::record(Trajectory& traj, double t, const ScalarField& phi, const ScalarField& mu,
                      const ScalarField& phi0) {
    traj.times.push_back(t);
    traj.mass.push_back(mean(phi));
    traj.energy.push_back(energy(phi, cfg_.g_field ? &*cfg_.g_field : nullptr));
    traj.phi_min.push_back(min_value(phi));
    traj.phi_max.push_back(max_value(phi));
    traj.grad_mu_l2.push_back(ops_.grad_l2_norm(mu));
    if (traj.times.size() == 1) {
        traj.dist_h_to_init.push_back(0.0);
    } else {
        ScalarField diff(cfg_.grid);
        for (std::size_t i = 0; i < diff.values.size(); ++i)
            diff.values[i] = phi.values[i] - phi0.values[i];
        traj.dist_h_to_init.push_back(ops_.hminus1_norm(diff));
    }
}

Trajectory ChSolver::run() {
    return run(ScalarField::constant(cfg_.grid, -1.0 + cfg_.lambda));
}

Trajectory ChSolver::run(const ScalarField& phi0) {
    if (!(phi0.grid == cfg_.grid)) throw GridMismatch("initial field on wrong grid");
    if (max_abs(phi0) >= 1.0) throw BoundsBreached("initial field must satisfy |phi| < 1");

    const long steps = std::lround(cfg_.t_end / cfg_.dt);
    if (steps < 1) throw DomainError("t_end shorter than one step");

    Trajectory traj;
    ScalarField phi = phi0;

    // diagnostics at t = 0 use the instantaneous chemical potential
    {
        ScalarField mu0(cfg_.grid);
        if (nonlocal()) {
            ScalarField conv = ops_.convolve(*cfg_.kernel, phi);
            for (std::size_t i = 0; i < mu0.values.size(); ++i)
                mu0.values[i] = cfg_.kernel->a_const * phi.values[i] - conv.values[i];
        } else {
            ScalarField lap = ops_.laplacian(phi);
            for (std::size_t i = 0; i < mu0.values.size(); ++i) mu0.values[i] = -lap.values[i];
        }
        for (std::size_t i = 0; i < mu0.values.size(); ++i) {
            mu0.values[i] += cfg_.pot.beta_reg(phi.values[i], cfg_.clip) +
                             cfg_.pot.pi(phi.values[i]);
            if (cfg_.g_field) mu0.values[i] += cfg_.g_field->values[i];
        }
        record(traj, 0.0, phi, mu0, phi0);
    }
    traj.snapshot_times.push_back(0.0);
    traj.snapshots.push_back(phi);

    double prev_mass = traj.mass.front();
    double prev_energy = traj.energy.front();
    for (long step_idx = 1; step_idx <= steps; ++step_idx) {
        const double t = step_idx * cfg_.dt;
        StepResult res;
        try {
            res = step(phi, t - cfg_.dt);
        } catch (const NewtonDiverged& e) {
            throw NewtonDiverged(std::string(e.what()) + " at t = " + std::to_string(t));
        } catch (const BoundsBreached& e) {
            throw BoundsBreached(std::string(e.what()) + " at t = " + std::to_string(t));
        }
        phi = std::move(res.phi);
        record(traj, t, phi, res.mu, phi0);

        const double identity_gap =
            std::abs(traj.mass.back() - prev_mass - cfg_.dt * res.source_mean);
        traj.max_mass_identity_error = std::max(traj.max_mass_identity_error, identity_gap);
        traj.max_energy_increase =
            std::max(traj.max_energy_increase, traj.energy.back() - prev_energy);
        traj.max_newton_iters = std::max(traj.max_newton_iters, res.newton_iters);
        prev_mass = traj.mass.back();
        prev_energy = traj.energy.back();

        if (step_idx % cfg_.snapshot_stride == 0 || step_idx == steps) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(phi);
        }
    }
    return traj;
}

double energy_local(const SingularPotential& pot, const ScalarField& phi, const ScalarField* g) {
    if (max_abs(phi) > 1.0) throw DomainError("energy requires |phi| <= 1");
    SpectralOps ops(phi.grid);
    const double grad = ops.grad_l2_norm(phi);
    double sum = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        sum += pot.F(phi.values[i]);
        if (g) sum += g->values[i] * phi.values[i];
    }
    return 0.5 * grad * grad + sum * phi.grid.cell_area();
}

double energy_nonlocal(const SingularPotential& pot, const KernelSpec& kernel,
                       const ScalarField& phi, const ScalarField* g) {
    if (max_abs(phi) > 1.0) throw DomainError("energy requires |phi| <= 1");
    require_same_grid(phi, kernel.k_values);
    SpectralOps ops(phi.grid);
    const ScalarField conv = ops.convolve(kernel, phi);
    double interaction = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const double p = phi.values[i];
        interaction += p * (kernel.a_const * p - conv.values[i]);
        sum += pot.F(p);
        if (g) sum += g->values[i] * p;
    }
    return (0.5 * interaction + sum) * phi.grid.cell_area();
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open diagnostics for writing: " + path);
    out << "t,mass,energy,phi_min,phi_max,grad_mu_l2,dist_h_to_init\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
        out.put(sep);
    };
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        put(traj.times[i], ',');
        put(traj.mass[i], ',');
        put(traj.energy[i], ',');
        put(traj.phi_min[i], ',');
        put(traj.phi_max[i], ',');
        put(traj.grad_mu_l2[i], ',');
        put(traj.dist_h_to_init[i], '\n');
    }
    if (!out.good()) throw Error("diagnostics write failed: " + path);
}

} // namespace chsep
