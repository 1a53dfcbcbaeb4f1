#ifndef GFD_QUADRATURE_HPP
#define GFD_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "gfd/errors.hpp"

namespace gfd {

/// One converged subinterval of an adaptive integration.
struct QuadPanel {
    double a = 0.0;
    double b = 0.0;
    double integral = 0.0;
    double error = 0.0;
};

/// 15-point Gauss-Kronrod rule (QUADPACK dqk15 abscissae/weights).
/// Returns the Kronrod estimate; *err gets |K - G| as the error proxy.
inline double gk15(const std::function<double(double)>& f, double a, double b,
                   double* err = nullptr) {
    static const double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static const double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static const double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = wgk[7] * fc;
    double gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += wgk[j] * fsum;
        if (j % 2 == 1) gauss += wg[j / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    if (err) *err = std::abs(kronrod - gauss);
    return kronrod;
}

/// Adaptive Gauss-Kronrod over a list of segments. The returned panels are the
/// final subdivision sorted by position; their integrals sum to the estimate.
/// Splits the worst panel until sum(err) <= max(rel_tol*|I|, abs_tol).
inline std::vector<QuadPanel> adaptive_gk(const std::function<double(double)>& f,
                                          const std::vector<double>& segment_edges,
                                          double rel_tol, double abs_tol,
                                          int max_panels) {
    auto worse = [](const QuadPanel& l, const QuadPanel& r) { return l.error < r.error; };
    std::priority_queue<QuadPanel, std::vector<QuadPanel>, decltype(worse)> heap(worse);

    double total = 0.0, total_err = 0.0;
    int count = 0;
    for (std::size_t i = 0; i + 1 < segment_edges.size(); ++i) {
        QuadPanel p;
        p.a = segment_edges[i];
        p.b = segment_edges[i + 1];
        if (!(p.b > p.a)) continue;
        p.integral = gk15(f, p.a, p.b, &p.error);
        total += p.integral;
        total_err += p.error;
        heap.push(p);
        ++count;
    }
    if (count == 0) throw NumericError("adaptive_gk: empty segment list");

    while (total_err > std::max(rel_tol * std::abs(total), abs_tol) && count < max_panels) {
        QuadPanel worst = heap.top();
        heap.pop();
        total -= worst.integral;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {  // interval at floating resolution
            worst.error = 0.0;
            heap.push(worst);
            continue;
        }
        for (const auto& [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            QuadPanel p;
            p.a = lo;
            p.b = hi;
            p.integral = gk15(f, lo, hi, &p.error);
            total += p.integral;
            total_err += p.error;
            heap.push(p);
        }
        ++count;
    }

    std::vector<QuadPanel> panels;
    panels.reserve(count);
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const QuadPanel& l, const QuadPanel& r) { return l.a < r.a; });
    return panels;
}

/// Convenience: adaptive integral value over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-10, double abs_tol = 1e-14,
                        int max_panels = 2000) {
    const auto panels = adaptive_gk(f, {a, b}, rel_tol, abs_tol, max_panels);
    double acc = 0.0;
    for (const auto& p : panels) acc += p.integral;
    return acc;
}

} // namespace gfd

#endif
