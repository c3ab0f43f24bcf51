#pragma once

// Adaptive Gauss-Kronrod (7,15) integration with optional breakpoint lists.
// The error estimate per segment is |K15 - G7|, which overestimates the
// Kronrod error, so the tolerance control is conservative.  All nodes are
// interior, so integrands may be singular at segment endpoints as long as
// the limit exists along the sample points.

#include "truncation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qbern {

struct IntegrationResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
};

namespace detail {

// Kronrod-15 node magnitudes; odd indices plus the center are the Gauss-7 nodes.
inline constexpr double kGK15Nodes[7] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245};
inline constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
void gauss_kronrod_15(F&& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(c);
    double kres = fc * kK15Weights[7];
    double gres = fc * kG7Weights[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kGK15Nodes[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kres += kK15Weights[i] * (f1 + f2);
        if (i % 2 == 1)
            gres += kG7Weights[i / 2] * (f1 + f2);
    }
    value = kres * half;
    err = std::abs((kres - gres) * half);
}

} // namespace detail

template <class F>
IntegrationResult integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                            int max_depth = 52) {
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate: requires finite a <= b");
    IntegrationResult out;
    if (a == b)
        return out;
    struct Segment {
        double a, b;
        int depth;
    };
    std::vector<Segment> stack{{a, b, 0}};
    NeumaierSum total;
    const double span = b - a;
    while (!stack.empty()) {
        const Segment seg = stack.back();
        stack.pop_back();
        double v = 0.0, e = 0.0;
        detail::gauss_kronrod_15(f, seg.a, seg.b, v, e);
        out.evaluations += 15;
        const double local_tol = abs_tol * (seg.b - seg.a) / span;
        if (e <= local_tol || seg.depth >= max_depth) {
            total.add(v);
            out.error_estimate += e;
            if (e > local_tol)
                out.converged = false;
        } else {
            const double mid = 0.5 * (seg.a + seg.b);
            stack.push_back({seg.a, mid, seg.depth + 1});
            stack.push_back({mid, seg.b, seg.depth + 1});
        }
    }
    out.value = total.value();
    return out;
}

// Same, but force segment boundaries at the given interior points first.
// Used for integrands that are only piecewise smooth (kernel panel joints).
template <class F>
IntegrationResult integrate_with_breakpoints(F&& f, double a, double b,
                                             std::vector<double> points,
                                             double abs_tol = 1e-12,
                                             int max_depth = 52) {
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate_with_breakpoints: requires finite a <= b");
    points.push_back(a);
    points.push_back(b);
    std::sort(points.begin(), points.end());
    IntegrationResult out;
    if (a == b)
        return out;
    NeumaierSum total;
    const double span = b - a;
    double prev = a;
    for (double p : points) {
        const double hi = std::min(std::max(p, a), b);
        if (hi <= prev)
            continue;
        const IntegrationResult part =
            integrate(f, prev, hi, abs_tol * (hi - prev) / span, max_depth);
        total.add(part.value);
        out.error_estimate += part.error_estimate;
        out.evaluations += part.evaluations;
        out.converged = out.converged && part.converged;
        prev = hi;
    }
    if (prev < b) {
        const IntegrationResult part =
            integrate(f, prev, b, abs_tol * (b - prev) / span, max_depth);
        total.add(part.value);
        out.error_estimate += part.error_estimate;
        out.evaluations += part.evaluations;
        out.converged = out.converged && part.converged;
    }
    out.value = total.value();
    return out;
}

} // namespace qbern
