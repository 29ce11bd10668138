#pragma once

#include <cmath>
#include <utility>

namespace loynes {

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section minimization on [lo, hi]. Assumes f is unimodal on the
// bracket; returns the best point actually evaluated, which also behaves
// sanely when the minimum sits on an endpoint.
template <class F>
GoldenResult golden_section_min(F &&f, double lo, double hi, double width_tol,
                                int max_iter = 400) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    GoldenResult best = f1 <= f2 ? GoldenResult{x1, f1} : GoldenResult{x2, f2};
    for (int it = 0; it < max_iter && (b - a) > width_tol; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
        const GoldenResult cand = f1 <= f2 ? GoldenResult{x1, f1} : GoldenResult{x2, f2};
        if (cand.value < best.value) best = cand;
    }
    const double mid = 0.5 * (a + b);
    const double fmid = f(mid);
    if (fmid < best.value) best = {mid, fmid};
    return best;
}

} // namespace loynes
