#pragma once

#include <functional>
#include <optional>

#include "chsep/grid.hpp"

namespace chsep {

enum class PotentialKind { FloryHuggins, Custom };

/// Callables for a user-supplied singular potential. The caller guarantees
/// beta is strictly increasing on (-1,1) with beta(0)=0 and blow-up at the
/// endpoints, beta_hat convex nonnegative with beta_hat(0)=0, and pi
/// Lipschitz with the declared constant. Smoothness cannot be verified here.
struct CustomPotential {
    std::function<double(double)> beta;
    std::function<double(double)> beta_prime;
    std::function<double(double)> beta_hat;
    std::function<double(double)> pi;
    std::function<double(double)> pi_hat;
    std::function<double(double)> pi_prime; ///< optional; needed only for F''
    double lipschitz_l0 = 0.0;
};

/// Double-well potential F = beta_hat + pi_hat with singular convex part.
/// The Flory-Huggins form is
///   F(r) = (theta/2)[(1+r)ln(1+r) + (1-r)ln(1-r)] - (theta0/2) r^2,
/// 0 < theta < theta0, whose monotone part is
///   beta(r) = (theta/2) ln((1+r)/(1-r)).
class SingularPotential {
  public:
    static SingularPotential flory_huggins(double theta, double theta0);
    static SingularPotential custom(CustomPotential funcs);

    PotentialKind kind() const { return kind_; }
    double theta() const { return theta_; }
    double theta0() const { return theta0_; }
    /// Lipschitz constant of pi (theta0 for Flory-Huggins).
    double lipschitz_l0() const;

    double beta(double r) const;       ///< (-1,1)
    double beta_prime(double r) const; ///< (-1,1)
    double beta_hat(double r) const;   ///< [-1,1]
    double pi(double r) const;
    double pi_hat(double r) const;
    double F(double r) const;        ///< [-1,1]; continuous up to the endpoints
    double F_prime(double r) const;  ///< (-1,1)
    double F_second(double r) const; ///< (-1,1)

    /// C^1 extension of beta to all of R: equals beta on [-(1-clip), 1-clip],
    /// linear with slope beta'(+-(1-clip)) outside. Solver safeguard; the
    /// dynamics keep states inside the clip region.
    double beta_reg(double r, double clip) const;
    double beta_reg_prime(double r, double clip) const;

  private:
    SingularPotential() = default;
    PotentialKind kind_ = PotentialKind::FloryHuggins;
    double theta_ = 0.0;
    double theta0_ = 0.0;
    CustomPotential custom_;
};

/// Explicit constants of the sharp pointwise inequality for threshold
/// delta: c_beta = min{1/2, (1-delta)/delta}, C_beta = 1/delta.
struct SharpConstants {
    double delta;
    double c_beta;
    double C_beta;
};

SharpConstants sharp_constants(double delta);

struct InequalityCheck {
    double lhs;
    double rhs;
    bool holds;
};

/// Sharp inequality near the pure phase: for r in (-1,1), r0 in (-1,-1+delta),
///   c_beta (r0+1)|beta(r)| <= beta(r)(r-r0)
///                             + [(r+1) + C_beta (r0+1)] |beta(-1+(r0+1)/2)|.
/// Checked with absolute slack 1e-12.
InequalityCheck check_sharp_inequality(const SingularPotential& pot, double r, double r0, double delta);

/// Same inequality with caller-supplied constants (falsifiability harness).
InequalityCheck check_sharp_inequality_with(const SingularPotential& pot, double r, double r0,
                                    double delta, double c_beta, double C_beta);

/// Integral (mean-value) form over a discrete field with mean in
/// (-1,-1+delta); means replace integrals:
///   c_beta (m+1) <|beta(phi)|> <= <beta(phi)(phi-m)> + C_beta (m+1)|beta(-1+(m+1)/2)|.
InequalityCheck check_sharp_inequality_integral(const SingularPotential& pot, const ScalarField& phi,
                                        double delta);

struct ClassicalConstants {
    double c_star;
    double C_star;
};

/// Brute-force certificate of the classical inequality
///   c_* |beta(r)| <= beta(r)(r - r0) + C_*
/// on a tensor grid of (r, r0) in (-1,1) x [r_star, r_upper]: the largest
/// c_* in {2^-k} and smallest C_* in {2^k}, k <= 40, valid on every grid
/// point. Certifies the grid, not the continuum; constants are monotone
/// under refinement.
ClassicalConstants discover_classical_constants(const SingularPotential& pot, double r_star,
                                         double r_upper, int grid_n);

/// inf over (-1,1) of a_* + F''(r) for Flory-Huggins (attained at r = 0).
/// Positive return is an admissible coercivity constant; negative signals
/// the kernel condition is violated.
double coercivity_margin(const SingularPotential& pot, double a_star);

} // namespace chsep
