#include "chsep/mean_dynamics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace chsep {

MeanBounds MeanBounds::make(double c0, double m_bar, double lambda, double t_end) {
    if (!(c0 > 0.0 && c0 <= 1.0)) throw DomainError("c0 must lie in (0,1]");
    if (!(m_bar > 0.0)) throw DomainError("m_bar must be positive");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in [0,1)");
    if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
    MeanBounds b;
    b.c0 = c0;
    b.m_bar = m_bar;
    b.lambda = lambda;
    b.t_end = t_end;
    // -1 + 2 c1 t minorizes the lower envelope on [0, t_end] by convexity
    // of 1 - e^{-m t}; this c1 is one valid witness.
    b.c1 = c0 * (1.0 - std::exp(-m_bar * t_end)) / (2.0 * t_end);
    b.c2 = 2.0 - c0;
    b.lambda0 = 0.5 * c0;
    return b;
}

MeanBounds MeanBounds::from(const ReactionSpec& reaction, double lambda, double t_end) {
    return make(reaction.c0(), reaction.m_sup(), lambda, t_end);
}

double MeanBounds::lower(double t) const {
    return -1.0 + c0 * (1.0 - std::exp(-m_bar * t));
}

double MeanBounds::upper(double t) const {
    const double decay = std::exp(-m_bar * t);
    return -1.0 + (2.0 - c0) * (1.0 - decay) + lambda * decay;
}

double exact_oono_mean(double m, double c, double lambda, double t) {
    return c + (-1.0 + lambda - c) * std::exp(-m * t);
}

MeanReport verify_mean_confinement(const std::vector<double>& times,
                                   const std::vector<double>& mass, const MeanBounds& bounds,
                                   double slack) {
    if (times.size() != mass.size()) throw DomainError("times and mass must align");
    MeanReport report;
    report.rows.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        MeanReportRow row;
        row.t = times[i];
        row.mass = mass[i];
        row.lower = bounds.lower(row.t);
        row.upper = std::min(bounds.upper(row.t), 1.0 - bounds.lambda0);
        row.violation = (row.mass < row.lower - slack) || (row.mass > row.upper + slack);
        report.violation_count += row.violation;
        report.rows.push_back(row);
    }
    return report;
}

void write_mean_report_csv(const std::string& path, const MeanReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open mean report for writing: " + path);
    out << "t,mass,lower,upper,violation_flag\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
        out.put(sep);
    };
    for (const MeanReportRow& row : report.rows) {
        put(row.t, ',');
        put(row.mass, ',');
        put(row.lower, ',');
        put(row.upper, ',');
        out << (row.violation ? 1 : 0) << '\n';
    }
    if (!out.good()) throw Error("mean report write failed: " + path);
}

} // namespace chsep
