#pragma once

// The open equispaced quadrature rule
//
//   Q_m(f;a,b) = ((b-a)/(m-1)) sum_{j=1}^{m-1} f(a + j(b-a)/m),
//
// exact on polynomials of degree <= 1, together with its Peano kernel
//
//   R_{a,b}(f) = int_a^b f - Q_m(f;a,b) = int_a^b K_{a,b}(t) f''(t) dt,
//
// the h-periodic kernel extension, the kernel moments
// I_j = int_0^h K(t)/(t+jh)^2 dt with their closed forms, and the composite
// error estimates on finite and semi-infinite intervals.

#include "integrate.hpp"
#include "truncation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qbern {

inline constexpr double kPiSquaredOver6 = std::numbers::pi * std::numbers::pi / 6.0;

template <class F>
double quad_rule(F&& f, double a, double b, int m) {
    if (m < 2)
        throw std::invalid_argument("quad_rule: requires m >= 2");
    if (!(a < b))
        throw std::invalid_argument("quad_rule: requires a < b");
    const double len = b - a;
    NeumaierSum s;
    for (int j = 1; j <= m - 1; ++j)
        s.add(f(a + j * len / m));
    return s.value() * len / (m - 1);
}

// Kernel geometry: either one interval [a,b] split into m panels, or the
// h-periodic extension of the [0,h] kernel.
struct KernelSpec {
    enum class Mode { local, periodic };
    Mode mode = Mode::local;
    double a = 0.0;
    double b = 1.0;
    int m = 2;

    static KernelSpec local(double a, double b, int m) {
        if (!(a < b))
            throw std::invalid_argument("KernelSpec: requires a < b");
        if (m < 2)
            throw std::invalid_argument("KernelSpec: requires m >= 2");
        return {Mode::local, a, b, m};
    }
    static KernelSpec periodic(double h, int m) {
        if (!(h > 0.0))
            throw std::invalid_argument("KernelSpec: requires h > 0");
        if (m < 2)
            throw std::invalid_argument("KernelSpec: requires m >= 2");
        return {Mode::periodic, 0.0, h, m};
    }
    double h() const { return b - a; }
    double h1() const { return (b - a) / m; }
};

namespace detail {

// K on one period, 0 <= u <= h.  On panel [k h/m, (k+1) h/m] the kernel is
// the parabola with vertex at hk/(m-1) and minimum h^2 k(m-k-1)/(2m(m-1)^2):
//
//   K(u) = (u - hk/(m-1))^2 / 2 + h^2 k(m-k-1) / (2m(m-1)^2),
//
// which expands to the textbook form u^2/2 - hku/(m-1) + h^2 k(k+1)/(2m(m-1)).
// The vertex form keeps nonnegativity explicit and exact at the endpoints.
inline double peano_kernel_on_period(double h, int m, double u) {
    int k = static_cast<int>(std::floor(u * m / h));
    k = std::max(0, std::min(k, m - 1));
    const double d = u - h * k / (m - 1.0);
    return 0.5 * d * d +
           h * h * k * (m - k - 1.0) / (2.0 * m * (m - 1.0) * (m - 1.0));
}

} // namespace detail

// K_{a,b}(t); zero outside [a,b].
inline double peano_kernel_local(double a, double b, int m, double t) {
    if (m < 2)
        throw std::invalid_argument("peano_kernel_local: requires m >= 2");
    if (!(a < b))
        throw std::invalid_argument("peano_kernel_local: requires a < b");
    if (t < a || t > b)
        return 0.0;
    return detail::peano_kernel_on_period(b - a, m, t - a);
}

// h-periodic extension, defined for all real t.
inline double peano_kernel_periodic(double h, int m, double t) {
    if (m < 2)
        throw std::invalid_argument("peano_kernel_periodic: requires m >= 2");
    if (!(h > 0.0))
        throw std::invalid_argument("peano_kernel_periodic: requires h > 0");
    double u = std::fmod(t, h);
    if (u < 0.0)
        u += h;
    return detail::peano_kernel_on_period(h, m, u);
}

inline double peano_kernel(const KernelSpec& spec, double t) {
    return spec.mode == KernelSpec::Mode::local
               ? peano_kernel_local(spec.a, spec.b, spec.m, t)
               : peano_kernel_periodic(spec.h(), spec.m, t);
}

// rho(t) = 1/(e^t + e^{-t} - 2) = 1/(4 sinh^2(t/2)); the second derivative
// of -ln(1-e^{-t}) and the decay weight rho(s+t) <= e^{-s} rho(t).
inline double rho(double t) {
    if (!(t > 0.0))
        throw std::domain_error("rho: requires t > 0");
    const double s = std::sinh(0.5 * t);
    return 1.0 / (4.0 * s * s);
}

// f(t) = -ln(1-e^{-t}) for t > 0; below t = 1e-4 split off the log
// singularity and expand (1-e^{-t})/t in series to dodge cancellation.
inline double neglog1mexp(double t) {
    if (!(t > 0.0))
        throw std::domain_error("neglog1mexp: requires t > 0");
    if (t < 1e-4) {
        const double g =
            t * (-0.5 + t * (1.0 / 6.0 + t * (-1.0 / 24.0 + t / 120.0)));
        return -std::log(t) - std::log1p(g);
    }
    return -std::log(-std::expm1(-t));
}

// Li_2(z) for z in [0,1]: direct series for z <= 1/2, Euler reflection above.
inline double dilog_unit(double z) {
    if (!(z >= 0.0 && z <= 1.0))
        throw std::domain_error("dilog_unit: requires 0 <= z <= 1");
    if (z == 1.0)
        return kPiSquaredOver6;
    if (z > 0.5)
        return kPiSquaredOver6 - std::log(z) * std::log1p(-z) - dilog_unit(1.0 - z);
    NeumaierSum s;
    double zk = z;
    for (int k = 1; zk > 1e-18; ++k) {
        s.add(zk / (static_cast<double>(k) * k));
        zk *= z;
    }
    return s.value();
}

// int_s^infty -ln(1-e^{-t}) dt = Li_2(e^{-s}) = sum_k e^{-ks}/k^2.
// For small s go through the reflection with 1-e^{-s} formed stably.
inline double dilog_exp_tail(double s) {
    if (!(s > 0.0))
        throw std::domain_error("dilog_exp_tail: requires s > 0");
    if (s < std::numbers::ln2) {
        const double one_minus_z = -std::expm1(-s); // 1 - e^{-s}, exact to ulps
        return kPiSquaredOver6 + s * std::log(one_minus_z) - dilog_unit(one_minus_z);
    }
    return dilog_unit(std::exp(-s));
}

// Closed-form kernel moments I_j = int_0^h K(t)/(t+jh)^2 dt:
//   I_0 = h (m - 1 - m ln m + ln m!) / (m-1)
//   I_j = h - h sum_{k=0}^{m-1} (j + k/(m-1)) ln(1 + 1/(jm+k)),  j >= 1.
inline double kernel_moment(int m, double h, int j) {
    if (m < 2)
        throw std::invalid_argument("kernel_moment: requires m >= 2");
    if (!(h > 0.0))
        throw std::invalid_argument("kernel_moment: requires h > 0");
    if (j < 0)
        throw std::invalid_argument("kernel_moment: requires j >= 0");
    if (j == 0)
        return h * (m - 1.0 - m * std::log(static_cast<double>(m)) + std::lgamma(m + 1.0)) /
               (m - 1.0);
    NeumaierSum s;
    for (int k = 0; k < m; ++k)
        s.add((j + k / (m - 1.0)) *
              std::log1p(1.0 / (static_cast<double>(j) * m + k)));
    return h - h * s.value();
}

// The same moment by adaptive integration, split at the kernel panel joints.
inline IntegrationResult kernel_moment_integral(int m, double h, int j,
                                                double abs_tol = 1e-12) {
    if (m < 2 || !(h > 0.0) || j < 0)
        throw std::invalid_argument("kernel_moment_integral: bad parameters");
    std::vector<double> joints;
    for (int k = 1; k < m; ++k)
        joints.push_back(h * k / m);
    auto f = [=](double t) {
        const double s = t + j * h;
        return detail::peano_kernel_on_period(h, m, t) / (s * s);
    };
    return integrate_with_breakpoints(f, 0.0, h, joints, abs_tol);
}

// theta(x) = ln sqrt(2 pi x) + 9/(12x+1) - 2/(9x) + 15 - 20 ln3 + 8 ln2,
// the positivity certificate for the kernel-moment inequality; increasing
// on [2, infinity).
inline double theta(double x) {
    if (!(x >= 2.0))
        throw std::domain_error("theta: requires x >= 2");
    return 0.5 * std::log(2.0 * std::numbers::pi * x) + 9.0 / (12.0 * x + 1.0) -
           2.0 / (9.0 * x) + 15.0 - 20.0 * std::log(3.0) + 8.0 * std::numbers::ln2;
}

enum class ErrorMethod { direct, peano };

struct ErrorReport {
    double value_integral = 0.0;
    double value_quadrature = 0.0;
    double error = 0.0; // always value_integral - value_quadrature
    ErrorMethod method = ErrorMethod::direct;
    bool converged = true;
    bool cap_hit = false;
};

// Composite rule on [a,b] with n panels of width (b-a)/n, each sampled by
// the m-point open rule.  direct: adaptive integral of f minus the summed
// rule.  peano: error = int_a^b f''(t) K(t-a) dt with K the h-periodic
// kernel; value_integral is then reported as quadrature + error so the
// ErrorReport identity holds for both methods.
template <class F, class Fpp>
ErrorReport composite_error(F&& f, Fpp&& fpp, double a, double b, int n, int m,
                            ErrorMethod method, double abs_tol = 1e-12) {
    if (!(a < b))
        throw std::invalid_argument("composite_error: requires a < b");
    if (n < 1 || m < 2)
        throw std::invalid_argument("composite_error: requires n >= 1, m >= 2");
    const double h = (b - a) / n;
    NeumaierSum qsum;
    for (int i = 0; i < n; ++i)
        qsum.add(quad_rule(f, a + i * h, a + (i + 1) * h, m));

    ErrorReport rep;
    rep.method = method;
    rep.value_quadrature = qsum.value();
    if (method == ErrorMethod::direct) {
        std::vector<double> joints;
        for (int i = 1; i < n; ++i)
            joints.push_back(a + i * h);
        const IntegrationResult ir = integrate_with_breakpoints(f, a, b, joints, abs_tol);
        rep.converged = ir.converged;
        rep.value_integral = ir.value;
        rep.error = ir.value - rep.value_quadrature;
    } else {
        std::vector<double> joints;
        for (int i = 1; i < n * m; ++i)
            joints.push_back(a + i * (b - a) / (static_cast<double>(n) * m));
        auto g = [&](double t) { return fpp(t) * peano_kernel_periodic(h, m, t - a); };
        const IntegrationResult ir = integrate_with_breakpoints(g, a, b, joints, abs_tol);
        rep.converged = ir.converged;
        rep.error = ir.value;
        rep.value_integral = rep.value_quadrature + rep.error;
    }
    return rep;
}

// Composite rule on [a, infinity), truncated at T* = -ln(eps_tail) + 2 + a
// rounded up to whole panels; requires an integrand decaying at least like
// e^{-t} (rho and -ln(1-e^{-t}) both qualify).
template <class F, class Fpp>
ErrorReport composite_error_seminf(F&& f, Fpp&& fpp, double a, double h, int m,
                                   ErrorMethod method,
                                   const TruncationPolicy& policy = {},
                                   double abs_tol = 1e-12) {
    policy.validate();
    if (!(a > 0.0))
        throw std::invalid_argument("composite_error_seminf: requires a > 0");
    if (!(h > 0.0) || m < 2)
        throw std::invalid_argument("composite_error_seminf: requires h > 0, m >= 2");
    const double tstar = a - std::log(policy.eps_tail) + 2.0;
    const double n_real = std::ceil((tstar - a) / h);
    ErrorReport rep;
    rep.method = method;
    if (n_real > static_cast<double>(policy.max_terms)) {
        rep.cap_hit = true;
        return rep;
    }
    const int n = static_cast<int>(n_real);
    const double b = a + n * h;
    rep = composite_error(f, fpp, a, b, n, m, method, abs_tol);
    return rep;
}

enum class KernelWeight { inverse_square, rho };

struct WeightedKernelCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; // lhs - rhs, nonnegative when the inequality holds
};

// inverse_square: I_0 >= 8 (I_1 + I_2) via the closed forms.
// rho (requires h <= ln 4): int_0^h K rho >= e^{3h/2} int_h^{3h} K rho by
// adaptive integration with splits at the kernel joints.
inline WeightedKernelCheck weighted_kernel_inequality(int m, double h,
                                                      KernelWeight weight,
                                                      double abs_tol = 1e-12) {
    if (m < 2)
        throw std::invalid_argument("weighted_kernel_inequality: requires m >= 2");
    if (!(h > 0.0))
        throw std::invalid_argument("weighted_kernel_inequality: requires h > 0");
    WeightedKernelCheck out;
    if (weight == KernelWeight::inverse_square) {
        out.lhs = kernel_moment(m, h, 0);
        out.rhs = 8.0 * (kernel_moment(m, h, 1) + kernel_moment(m, h, 2));
    } else {
        if (h > 2.0 * std::numbers::ln2 + 1e-12)
            throw std::domain_error(
                "weighted_kernel_inequality: rho mode requires h <= ln 4");
        auto krho = [=](double t) { return peano_kernel_periodic(h, m, t) * rho(t); };
        std::vector<double> joints0, joints1;
        for (int k = 1; k < m; ++k)
            joints0.push_back(h * k / m);
        for (int k = 1; k < 2 * m; ++k)
            joints1.push_back(h + h * k / m);
        out.lhs = integrate_with_breakpoints(krho, 0.0, h, joints0, abs_tol).value;
        out.rhs = std::exp(1.5 * h) *
                  integrate_with_breakpoints(krho, h, 3.0 * h, joints1, abs_tol).value;
    }
    out.margin = out.lhs - out.rhs;
    return out;
}

struct DecayCheck {
    double lhs = 0.0; // E_{s+a, inf}
    double rhs = 0.0; // e^{-s} E_{a, inf}
};

// Composite-error decay for f = -ln(1-e^{-t}):  E_{s+a} <= e^{-s} E_a,
// both sides via the Peano representation int rho(t) K(t-start) dt.
inline DecayCheck composite_error_decay(double s, double a, int m, double h,
                                        const TruncationPolicy& policy = {},
                                        double abs_tol = 1e-12) {
    if (!(s >= 0.0))
        throw std::invalid_argument("composite_error_decay: requires s >= 0");
    if (!(a > 0.0))
        throw std::invalid_argument("composite_error_decay: requires a > 0");
    auto err_from = [&](double start) {
        return composite_error_seminf([](double t) { return neglog1mexp(t); },
                                      [](double t) { return rho(t); }, start, h, m,
                                      ErrorMethod::peano, policy, abs_tol)
            .error;
    };
    return {err_from(s + a), std::exp(-s) * err_from(a)};
}

struct TailAreaCheck {
    double lhs = 0.0; // int_S^inf f
    double rhs = 0.0; // -S T + int_0^T f
};

// Tail-area inequality for f = -ln(1-e^{-t}):
//   int_S^infty f >= -S T + int_0^T f,
// both sides through the exponential dilogarithm series.
inline TailAreaCheck tail_area_inequality(double S, double T) {
    if (!(S > 0.0) || !(T > 0.0))
        throw std::invalid_argument("tail_area_inequality: requires S, T > 0");
    const double lhs = dilog_exp_tail(S);
    const double rhs = -S * T + (kPiSquaredOver6 - dilog_exp_tail(T));
    return {lhs, rhs};
}

} // namespace qbern
