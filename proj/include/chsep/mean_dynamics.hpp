#pragma once

#include <string>
#include <vector>

#include "chsep/reaction.hpp"

namespace chsep {

/// Confinement envelope for the spatial mean of a run started at -1+lambda:
///   -1 + c0 (1 - e^{-m_bar t}) <= mass(t) <= -1 + (2-c0)(1 - e^{-m_bar t}) + lambda e^{-m_bar t},
/// with mass(t) additionally capped by 1 - lambda0, lambda0 = c0/2.
/// c1 witnesses the linear minorant -1 + 2 c1 t on [0, t_end].
struct MeanBounds {
    double c0;
    double m_bar;
    double lambda;
    double t_end;
    double c1;
    double c2;
    double lambda0;

    static MeanBounds make(double c0, double m_bar, double lambda, double t_end);
    static MeanBounds from(const ReactionSpec& reaction, double lambda, double t_end);

    double lower(double t) const;
    double upper(double t) const;
};

/// Closed-form mean of the Oono flow: y' = -m(y - c), y(0) = -1 + lambda.
double exact_oono_mean(double m, double c, double lambda, double t);

struct MeanReportRow {
    double t;
    double mass;
    double lower;
    double upper; ///< min(envelope upper, 1 - lambda0)
    bool violation;
};

struct MeanReport {
    std::vector<MeanReportRow> rows;
    int violation_count = 0;
    bool ok() const { return violation_count == 0; }
};

/// Flags every sample where mass < lower - slack or mass > upper + slack.
/// Violations are data, not exceptions.
MeanReport verify_mean_confinement(const std::vector<double>& times,
                                   const std::vector<double>& mass, const MeanBounds& bounds,
                                   double slack);

/// Columns: t, mass, lower, upper, violation_flag.
void write_mean_report_csv(const std::string& path, const MeanReport& report);

} // namespace chsep
