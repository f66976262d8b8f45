#include "chsep/potential.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace chsep {

namespace {

void require_open_interval(double r) {
    if (!(r > -1.0 && r < 1.0)) throw DomainError("argument must lie in (-1,1)");
}

void require_closed_interval(double r) {
    if (!(r >= -1.0 && r <= 1.0)) throw DomainError("argument must lie in [-1,1]");
}

// (1+r)ln(1+r), continuous extension by 0 at r = -1.
double xlogx_shifted(double r) {
    const double s = 1.0 + r;
    return s > 0.0 ? s * std::log(s) : 0.0;
}

} // namespace

SingularPotential SingularPotential::flory_huggins(double theta, double theta0) {
    if (!(theta > 0.0 && theta < theta0))
        throw DomainError("Flory-Huggins requires 0 < theta < theta0");
    SingularPotential p;
    p.kind_ = PotentialKind::FloryHuggins;
    p.theta_ = theta;
    p.theta0_ = theta0;
    return p;
}

SingularPotential SingularPotential::custom(CustomPotential funcs) {
    if (!funcs.beta || !funcs.beta_prime || !funcs.beta_hat || !funcs.pi || !funcs.pi_hat)
        throw DomainError("custom potential must supply beta, beta', beta_hat, pi, pi_hat");
    if (!(funcs.lipschitz_l0 >= 0.0)) throw DomainError("Lipschitz constant must be >= 0");
    SingularPotential p;
    p.kind_ = PotentialKind::Custom;
    p.custom_ = std::move(funcs);
    return p;
}

double SingularPotential::lipschitz_l0() const {
    return kind_ == PotentialKind::FloryHuggins ? theta0_ : custom_.lipschitz_l0;
}

double SingularPotential::beta(double r) const {
    require_open_interval(r);
    if (kind_ == PotentialKind::Custom) return custom_.beta(r);
    // log1p form stays accurate near the endpoints and is exactly odd.
    return 0.5 * theta_ * (std::log1p(r) - std::log1p(-r));
}

double SingularPotential::beta_prime(double r) const {
    require_open_interval(r);
    if (kind_ == PotentialKind::Custom) return custom_.beta_prime(r);
    return theta_ / ((1.0 - r) * (1.0 + r));
}

double SingularPotential::beta_hat(double r) const {
    require_closed_interval(r);
    if (kind_ == PotentialKind::Custom) return custom_.beta_hat(r);
    return 0.5 * theta_ * (xlogx_shifted(r) + xlogx_shifted(-r));
}

double SingularPotential::pi(double r) const {
    if (kind_ == PotentialKind::Custom) return custom_.pi(r);
    return -theta0_ * r;
}

double SingularPotential::pi_hat(double r) const {
    if (kind_ == PotentialKind::Custom) return custom_.pi_hat(r);
    return -0.5 * theta0_ * r * r;
}

double SingularPotential::F(double r) const {
    require_closed_interval(r);
    return beta_hat(r) + pi_hat(r);
}

double SingularPotential::F_prime(double r) const {
    require_open_interval(r);
    return beta(r) + pi(r);
}

double SingularPotential::F_second(double r) const {
    require_open_interval(r);
    if (kind_ == PotentialKind::Custom) {
        if (!custom_.pi_prime)
            throw DomainError("custom potential without pi_prime cannot evaluate F''");
        return custom_.beta_prime(r) + custom_.pi_prime(r);
    }
    return theta_ / ((1.0 - r) * (1.0 + r)) - theta0_;
}

double SingularPotential::beta_reg(double r, double clip) const {
    if (!(clip > 0.0 && clip < 1.0)) throw DomainError("clip must lie in (0,1)");
    const double rc = 1.0 - clip;
    if (r > rc) return beta(rc) + beta_prime(rc) * (r - rc);
    if (r < -rc) return beta(-rc) + beta_prime(-rc) * (r + rc);
    return beta(r);
}

double SingularPotential::beta_reg_prime(double r, double clip) const {
    if (!(clip > 0.0 && clip < 1.0)) throw DomainError("clip must lie in (0,1)");
    const double rc = 1.0 - clip;
    return beta_prime(std::clamp(r, -rc, rc));
}

SharpConstants sharp_constants(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    return {delta, std::min(0.5, (1.0 - delta) / delta), 1.0 / delta};
}

InequalityCheck check_sharp_inequality_with(const SingularPotential& pot, double r, double r0,
                                    double delta, double c_beta, double C_beta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    require_open_interval(r);
    if (!(r0 > -1.0 && r0 < -1.0 + delta)) throw DomainError("r0 must lie in (-1,-1+delta)");
    const double br = pot.beta(r);
    const double bmid = pot.beta(-1.0 + 0.5 * (r0 + 1.0));
    const double lhs = c_beta * (r0 + 1.0) * std::abs(br);
    const double rhs = br * (r - r0) + ((r + 1.0) + C_beta * (r0 + 1.0)) * std::abs(bmid);
    return {lhs, rhs, lhs <= rhs + 1e-12};
}

InequalityCheck check_sharp_inequality(const SingularPotential& pot, double r, double r0, double delta) {
    const SharpConstants c = sharp_constants(delta);
    return check_sharp_inequality_with(pot, r, r0, delta, c.c_beta, c.C_beta);
}

InequalityCheck check_sharp_inequality_integral(const SingularPotential& pot, const ScalarField& phi,
                                        double delta) {
    const SharpConstants c = sharp_constants(delta);
    const double m = mean(phi);
    if (!(m > -1.0 && m < -1.0 + delta))
        throw DomainError("field mean must lie in (-1,-1+delta)");
    double abs_sum = 0.0, pair_sum = 0.0;
    for (double v : phi.values) {
        const double b = pot.beta(v); // throws DomainError if |v| >= 1
        abs_sum += std::abs(b);
        pair_sum += b * (v - m);
    }
    const double n = static_cast<double>(phi.values.size());
    const double bmid = std::abs(pot.beta(-1.0 + 0.5 * (m + 1.0)));
    const double lhs = c.c_beta * (m + 1.0) * (abs_sum / n);
    const double rhs = pair_sum / n + c.C_beta * (m + 1.0) * bmid;
    return {lhs, rhs, lhs <= rhs + 1e-12};
}

ClassicalConstants discover_classical_constants(const SingularPotential& pot, double r_star,
                                         double r_upper, int grid_n) {
    if (!(r_star > -1.0 && r_star <= r_upper && r_upper < 1.0))
        throw DomainError("need -1 < r_star <= r_upper < 1");
    if (grid_n < 1) throw DomainError("grid_n must be >= 1");

    std::vector<double> r_grid(grid_n), beta_grid(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        r_grid[i] = -1.0 + (i + 0.5) * (2.0 / grid_n);
        beta_grid[i] = pot.beta(r_grid[i]);
    }
    std::vector<double> r0_grid;
    if (grid_n == 1 || r_star == r_upper) {
        r0_grid.push_back(r_star);
    } else {
        r0_grid.resize(grid_n);
        for (int j = 0; j < grid_n; ++j)
            r0_grid[j] = r_star + j * (r_upper - r_star) / (grid_n - 1);
    }

    constexpr int kMaxExponent = 40;
    for (int kc = 0; kc <= kMaxExponent; ++kc) {
        const double c_star = std::ldexp(1.0, -kc);
        double needed = 0.0;
        for (int i = 0; i < grid_n; ++i) {
            const double b = beta_grid[i];
            const double lhs_part = c_star * std::abs(b) - b * r_grid[i];
            for (double r0 : r0_grid) {
                const double gap = lhs_part + b * r0;
                if (gap > needed) needed = gap;
            }
        }
        for (int kC = 0; kC <= kMaxExponent; ++kC) {
            const double C_star = std::ldexp(1.0, kC);
            if (C_star >= needed) return {c_star, C_star};
        }
    }
    throw SearchFailed("no (c_*, C_*) in the search lattice certifies the grid");
}

double coercivity_margin(const SingularPotential& pot, double a_star) {
    if (pot.kind() != PotentialKind::FloryHuggins)
        throw DomainError("coercivity margin is evaluated for Flory-Huggins potentials only");
    if (!(a_star >= 0.0)) throw DomainError("a_star must be nonnegative");
    // F'' = theta/(1-r^2) - theta0 has its infimum theta - theta0 at r = 0.
    return a_star + pot.theta() - pot.theta0();
}

} // namespace chsep
