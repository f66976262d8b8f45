#include "chsep/grid.hpp"

#include <algorithm>
#include <cmath>

namespace chsep {

double mean(const ScalarField& v) {
    // Kahan summation; plain accumulation loses ~1e-12 on 128^2 grids.
    double sum = 0.0, comp = 0.0;
    for (double x : v.values) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(v.values.size());
}

double min_value(const ScalarField& v) {
    return *std::min_element(v.values.begin(), v.values.end());
}

double max_value(const ScalarField& v) {
    return *std::max_element(v.values.begin(), v.values.end());
}

double max_abs(const ScalarField& v) {
    double m = 0.0;
    for (double x : v.values) m = std::max(m, std::abs(x));
    return m;
}

} // namespace chsep
