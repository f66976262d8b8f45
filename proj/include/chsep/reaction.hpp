#pragma once

#include <algorithm>
#include <functional>
#include <optional>

#include "chsep/grid.hpp"

namespace chsep {

enum class ReactionKind { Oono, Inpainting, Tumor, Custom };

/// Tumor truncation: 0 at the healthy phase, 1 at the tumor phase,
/// linear in between.
inline double truncation_h(double r) { return std::clamp(0.5 * (1.0 + r), 0.0, 1.0); }

/// Reaction source S(x, phi, g) = -m(x) phi + h(x, phi, g) together with
/// the admissibility constants: m >= 0 with positive average m_mean, a
/// uniform bound h_bound < m_mean on h, and the derived detachment rate
/// c0 = (m_mean - h_bound)/m_sup in (0,1].
class ReactionSpec {
  public:
    /// S(phi) = -m (phi - c): constant damping m > 0, target c in (-1,1).
    static ReactionSpec oono(double m, double c, const Grid& grid);

    /// S(x,phi) = -m(x)(phi - c(x)) with m = m_bar on the mask, 0 off it.
    /// Requires a mask of {0,1} with both values present, image values in
    /// [-1,1], and sup|c_image| < |U|/|Omega|.
    static ReactionSpec inpainting(ScalarField mask, ScalarField c_image, double m_bar);

    /// S(phi,n) = -m phi + (n - delta_n)_+ h(phi) with the truncation h.
    /// Requires (1 - delta_n)_+ < m.
    static ReactionSpec tumor(double m, double delta_n, const Grid& grid);

    /// User-supplied h(phi, g) with declared uniform bound and optional
    /// Lipschitz constant in phi (needed by the continuous-dependence study).
    static ReactionSpec custom(ScalarField m_field, std::function<double(double, double)> h,
                               double h_bound, std::optional<double> lipschitz = {});

    ReactionKind kind() const { return kind_; }
    const ScalarField& m_field() const { return m_field_; }
    double m_mean() const { return m_mean_; } ///< spatial average of m
    double m_sup() const { return m_sup_; }   ///< sup of m
    double h_bound() const { return h_bound_; }
    double c0() const { return (m_mean_ - h_bound_) / m_sup_; }
    double compatibility_margin() const { return m_mean_ - h_bound_; }
    double oono_c() const { return oono_c_; }
    double delta_n() const { return delta_n_; }
    std::optional<double> lipschitz() const { return lipschitz_; }

    /// Pointwise S = -m phi + h. `other` carries the nutrient n for the
    /// Tumor kind and the source g for Custom; ignored otherwise.
    /// Rejects fields with |phi| > 1 + 1e-12.
    ScalarField eval(const ScalarField& phi, const ScalarField* other = nullptr) const;

  private:
    ReactionKind kind_ = ReactionKind::Oono;
    ScalarField m_field_;
    ScalarField c_image_; // inpainting image
    double m_mean_ = 0.0;
    double m_sup_ = 0.0;
    double h_bound_ = 0.0;
    double oono_c_ = 0.0;
    double delta_n_ = 0.0;
    std::function<double(double, double)> h_custom_;
    std::optional<double> lipschitz_;
};

} // namespace chsep
