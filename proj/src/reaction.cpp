#include "chsep/reaction.hpp"

#include <cmath>

namespace chsep {

ReactionSpec ReactionSpec::oono(double m, double c, const Grid& grid) {
    if (!(m > 0.0)) throw CompatibilityError("Oono damping m must be positive");
    if (!(std::abs(c) < 1.0))
        throw CompatibilityError("Oono target c must satisfy |c| < 1 (else h_bound >= m_mean)");
    ReactionSpec s;
    s.kind_ = ReactionKind::Oono;
    s.m_field_ = ScalarField::constant(grid, m);
    s.m_mean_ = m;
    s.m_sup_ = m;
    s.h_bound_ = m * std::abs(c);
    s.oono_c_ = c;
    return s;
}

ReactionSpec ReactionSpec::inpainting(ScalarField mask, ScalarField c_image, double m_bar) {
    require_same_grid(mask, c_image);
    if (!(m_bar > 0.0)) throw CompatibilityError("m_bar must be positive");
    std::size_t on = 0;
    for (double v : mask.values) {
        if (v != 0.0 && v != 1.0) throw DomainError("inpainting mask must be {0,1}-valued");
        on += (v == 1.0);
    }
    if (on == 0 || on == mask.values.size())
        throw CompatibilityError("mask must keep some cells and drop some (0 < |U| < |Omega|)");
    double c_sup = 0.0;
    for (double v : c_image.values) {
        if (!(v >= -1.0 && v <= 1.0)) throw CompatibilityError("image values must lie in [-1,1]");
        c_sup = std::max(c_sup, std::abs(v));
    }
    const double mask_fraction = static_cast<double>(on) / mask.values.size();
    if (!(c_sup < mask_fraction))
        throw CompatibilityError("need sup|c_image| < |U|/|Omega| for h_bound < m_mean");

    ReactionSpec s;
    s.kind_ = ReactionKind::Inpainting;
    s.m_field_ = std::move(mask);
    for (double& v : s.m_field_.values) v *= m_bar;
    s.c_image_ = std::move(c_image);
    s.m_mean_ = m_bar * mask_fraction;
    s.m_sup_ = m_bar;
    s.h_bound_ = m_bar * c_sup;
    return s;
}

ReactionSpec ReactionSpec::tumor(double m, double delta_n, const Grid& grid) {
    if (!(m > 0.0)) throw CompatibilityError("tumor damping m must be positive");
    if (!(delta_n >= 0.0 && delta_n <= 1.0))
        throw CompatibilityError("delta_n must lie in [0,1]");
    const double h_bound = std::max(1.0 - delta_n, 0.0);
    if (!(h_bound < m))
        throw CompatibilityError("tumor source needs (1 - delta_n)_+ < m for admissibility");
    ReactionSpec s;
    s.kind_ = ReactionKind::Tumor;
    s.m_field_ = ScalarField::constant(grid, m);
    s.m_mean_ = m;
    s.m_sup_ = m;
    s.h_bound_ = h_bound;
    s.delta_n_ = delta_n;
    return s;
}

ReactionSpec ReactionSpec::custom(ScalarField m_field, std::function<double(double, double)> h,
                                  double h_bound, std::optional<double> lipschitz) {
    if (!h) throw CompatibilityError("custom reaction requires a callable h");
    double sum = 0.0, sup = 0.0;
    for (double v : m_field.values) {
        if (!(v >= 0.0)) throw CompatibilityError("m must be nonnegative");
        sum += v;
        sup = std::max(sup, v);
    }
    const double m_mean = sum / m_field.values.size();
    if (!(m_mean > 0.0)) throw CompatibilityError("m must have positive average");
    if (!(h_bound >= 0.0 && h_bound < m_mean))
        throw CompatibilityError("need 0 <= h_bound < m_mean");
    ReactionSpec s;
    s.kind_ = ReactionKind::Custom;
    s.m_field_ = std::move(m_field);
    s.m_mean_ = m_mean;
    s.m_sup_ = sup;
    s.h_bound_ = h_bound;
    s.h_custom_ = std::move(h);
    s.lipschitz_ = lipschitz;
    return s;
}

ScalarField ReactionSpec::eval(const ScalarField& phi, const ScalarField* other) const {
    require_same_grid(phi, m_field_);
    if (max_abs(phi) > 1.0 + 1e-12)
        throw DomainError("reaction evaluated outside the physical interval");
    if (kind_ == ReactionKind::Tumor && other == nullptr)
        throw DomainError("tumor source needs the nutrient field");
    if (other != nullptr) require_same_grid(phi, *other);

    ScalarField out(phi.grid);
    const std::size_t n = phi.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        double h = 0.0;
        switch (kind_) {
            case ReactionKind::Oono:
                h = m_field_.values[i] * oono_c_;
                break;
            case ReactionKind::Inpainting:
                h = m_field_.values[i] * c_image_.values[i];
                break;
            case ReactionKind::Tumor:
                h = std::max(other->values[i] - delta_n_, 0.0) * truncation_h(phi.values[i]);
                break;
            case ReactionKind::Custom:
                h = h_custom_(phi.values[i], other ? other->values[i] : 0.0);
                break;
        }
        out.values[i] = -m_field_.values[i] * phi.values[i] + h;
    }
    return out;
}

} // namespace chsep
