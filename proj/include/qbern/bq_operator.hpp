#pragma once

// The limit q-Bernstein operator
//
//   B_q f(x) = sum_{k>=0} f(1-q^k) p_k(q;x)   for x in [0,1),
//   B_q f(1) = f(1),
//
// its node sets J_q = {1-q^k}, the extremal norm-one functions witnessing
// lower bounds for the operator distance ||B_q - B_r||, power-relation
// detection between parameters, and the distance estimators.

#include "piecewise_linear.hpp"
#include "qseries.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qbern {

struct NodeSet {
    double q = 0.0;
    int depth = 0;
    std::vector<double> nodes; // 1 - q^k, k = 0..depth
};

// Nodes 1 - q^k up to the requested depth, cut short where q^k underflows
// past double resolution (the node would round to 1.0 and stop increasing).
inline NodeSet make_node_set(const QParam& q, int depth) {
    if (depth < 0)
        throw std::invalid_argument("make_node_set: depth must be nonnegative");
    NodeSet ns;
    ns.q = q.value();
    double qk = 1.0;
    for (int k = 0; k <= depth; ++k) {
        const double node = 1.0 - qk;
        if (node >= 1.0 || (!ns.nodes.empty() && node <= ns.nodes.back()))
            break;
        ns.nodes.push_back(node);
        qk *= q.value();
    }
    ns.depth = static_cast<int>(ns.nodes.size()) - 1;
    return ns;
}

struct BqResult {
    double value = 0.0;
    double tail_bound = 0.0; // certified weight mass handled by closed form
    bool cap_hit = false;
};

// B_q f(x).  The node loop runs until either the remaining weight mass is
// below eps_tail or the next node is no longer distinguishable from 1.0 in
// double precision; in both cases the closed-form geometric remainder
// T0 = pref x^{K+1}/(1-x) is attributed to f(1).  The attribution is exact
// in the second case (every remaining node evaluates to 1.0) and costs at
// most ||f|| eps_tail in the first.
template <class F>
BqResult apply_Bq_report(F&& f, const QParam& q, double x,
                         const TruncationPolicy& policy = {}) {
    policy.validate();
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("apply_Bq: requires 0 <= x <= 1");
    if (x == 1.0)
        return {f(1.0), 0.0, false};
    if (x == 0.0)
        return {f(0.0), 0.0, false};
    const double qv = q.value();
    const Truncated poch_x = qpoch_inf(x, q, policy);
    const Truncated poch_q = qpoch_inf(qv, q, policy);
    const double pref = poch_x.value / poch_q.value;
    const double tail_coeff = pref * qv / ((1.0 - qv) * (1.0 - x * qv));

    BqResult out;
    out.cap_hit = poch_x.cap_hit || poch_q.cap_hit;
    NeumaierSum acc;
    double w = poch_x.value; // p_k, starting at p_0
    acc.add(f(0.0) * w);
    std::size_t terms = 1;
    double xpow = x;  // x^{k+1}
    double qkp1 = qv; // q^{k+1}
    for (;;) {
        const double t0 = pref * xpow / (1.0 - x);
        const double next_node = 1.0 - qkp1;
        if (t0 <= policy.eps_tail || next_node >= 1.0) {
            acc.add(f(1.0) * t0);
            out.tail_bound = t0;
            break;
        }
        if (terms >= policy.max_terms) {
            out.cap_hit = true;
            acc.add(f(1.0) * t0);
            out.tail_bound = t0 + tail_coeff * xpow * qkp1;
            break;
        }
        w *= x / (1.0 - qkp1);
        acc.add(f(next_node) * w);
        ++terms;
        xpow *= x;
        qkp1 *= qv;
    }
    out.value = acc.value();
    return out;
}

template <class F>
double apply_Bq(F&& f, const QParam& q, double x, const TruncationPolicy& policy = {}) {
    return apply_Bq_report(std::forward<F>(f), q, x, policy).value;
}

// Conflicting extremal prescriptions closer than the collision tolerance.
class NodeCollisionError : public std::runtime_error {
public:
    explicit NodeCollisionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExtremalOptions {
    int guard_depth = 20;         // zero-pinned nodes past the active depth
    double collision_tol = 1e-12; // conflicting prescriptions closer than this collide
    double collision_floor = 1e-8; // ... but only at node depth 1-pos >= this
};

namespace detail {

struct Prescription {
    double pos;
    double val;
};

// Turn prescriptions into a valid piecewise-linear function.  A conflict
// within collision_tol at resolvable depth (1 - pos >= collision_floor)
// signals a missed power relation and throws.  Node sets crowd together
// near 1 for every parameter pair (accidental coincidences like 1-0.5^40
// vs 1-0.3^23, 3e-14 apart), so past the floor both prescriptions are kept
// whenever the positions are still distinct doubles: each lattice then
// reads its own node exactly, and only positions rounded onto the same
// double merge, keeping the first prescription.  Positions that round to
// 1.0 merge into the structural endpoint f(1) = 0.
inline PiecewiseLinearFn assemble_extremal(std::vector<Prescription> pts,
                                           const ExtremalOptions& opt) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const Prescription& a, const Prescription& b) { return a.pos < b.pos; });
    std::vector<double> xs, ys;
    xs.reserve(pts.size() + 1);
    ys.reserve(pts.size() + 1);
    for (const Prescription& p : pts) {
        if (p.pos >= 1.0)
            continue;
        if (!xs.empty()) {
            const double gap = p.pos - xs.back();
            const bool conflicting = p.val != ys.back();
            if (gap < opt.collision_tol && conflicting &&
                1.0 - p.pos >= opt.collision_floor)
                throw NodeCollisionError(
                    "conflicting node prescriptions at x=" + std::to_string(p.pos) +
                    " (values " + std::to_string(ys.back()) + " and " +
                    std::to_string(p.val) + " within collision tolerance)");
            if (gap == 0.0)
                continue; // same double: keep the first prescription
        }
        xs.push_back(p.pos);
        ys.push_back(p.val);
    }
    xs.push_back(1.0);
    ys.push_back(0.0);
    return PiecewiseLinearFn(std::move(xs), std::move(ys));
}

} // namespace detail

// Extremal function for disjoint node sets (J_q and J_r meeting only at 0):
// +1 on 1-q^k, -1 on 1-r^k for k = 1..N, zero at 0, on guard-depth nodes
// past N, and at 1.  Then (B_q - B_r) f = sum_{k=1}^N [p_k(q;x) + p_k(r;x)].
inline PiecewiseLinearFn build_extremal_disjoint(const QParam& q, const QParam& r, int N,
                                                 const ExtremalOptions& opt = {}) {
    if (N < 1)
        throw std::invalid_argument("build_extremal_disjoint: requires N >= 1");
    std::vector<detail::Prescription> pts;
    pts.push_back({0.0, 0.0});
    double qk = 1.0, rk = 1.0;
    for (int k = 1; k <= N + opt.guard_depth; ++k) {
        qk *= q.value();
        rk *= r.value();
        const double vq = k <= N ? 1.0 : 0.0;
        const double vr = k <= N ? -1.0 : 0.0;
        pts.push_back({1.0 - qk, vq});
        pts.push_back({1.0 - rk, vr});
    }
    return detail::assemble_extremal(std::move(pts), opt);
}

// Detected relation r^j = q^m with coprime positive exponents.
struct PowerRelation {
    int j = 0;
    int m = 0;
    double residual = 0.0; // |j ln r - m ln q|
};

// Extremal function for the commensurable case r^j = q^m:
//   f(1-q^k) = -1 if m | k (this pins f(0) = -1 via k = 0), else +1,
//   f(1-r^k) = -1 for j does-not-divide k
// for k <= N; zero on guard nodes past N and at 1.  Nodes with j | k
// coincide with q-nodes and are already prescribed consistently.
inline PiecewiseLinearFn build_extremal_commensurable(const QParam& q, const QParam& r,
                                                      const PowerRelation& rel, int N,
                                                      const ExtremalOptions& opt = {}) {
    if (N < 1)
        throw std::invalid_argument("build_extremal_commensurable: requires N >= 1");
    if (rel.j < 1 || rel.m < 1)
        throw std::invalid_argument("build_extremal_commensurable: invalid relation");
    std::vector<detail::Prescription> pts;
    double qk = 1.0, rk = 1.0;
    pts.push_back({0.0, -1.0});
    for (int k = 1; k <= N + opt.guard_depth; ++k) {
        qk *= q.value();
        rk *= r.value();
        if (k <= N)
            pts.push_back({1.0 - qk, k % rel.m == 0 ? -1.0 : 1.0});
        else
            pts.push_back({1.0 - qk, 0.0});
        if (k % rel.j != 0)
            pts.push_back({1.0 - rk, k <= N ? -1.0 : 0.0});
    }
    return detail::assemble_extremal(std::move(pts), opt);
}

// Continued-fraction search for r^j = q^m: walk the convergents m/j of
// ln r / ln q (automatically in lowest terms) and accept the first one with
// both exponents within max_exponent and |j ln r - m ln q| < tol.
// Default tol is 1e-9 relative to |ln q|.
inline std::optional<PowerRelation> detect_power_relation(const QParam& q, const QParam& r,
                                                          int max_exponent = 64,
                                                          double tol = -1.0) {
    if (max_exponent < 1)
        throw std::invalid_argument("detect_power_relation: max_exponent must be positive");
    const double lnq = std::log(q.value());
    const double lnr = std::log(r.value());
    if (tol < 0.0)
        tol = 1e-9 * std::abs(lnq);
    double xv = lnr / lnq;
    long long num1 = 1, num2 = 0; // convergent numerators (candidate m)
    long long den1 = 0, den2 = 1; // convergent denominators (candidate j)
    for (int it = 0; it < 64; ++it) {
        const double fa = std::floor(xv);
        if (!(fa >= 0.0) || fa > static_cast<double>(max_exponent))
            break;
        const long long a = static_cast<long long>(fa);
        const long long m_cand = a * num1 + num2;
        const long long j_cand = a * den1 + den2;
        if (m_cand > max_exponent || j_cand > max_exponent)
            break;
        if (m_cand >= 1 && j_cand >= 1) {
            const double residual = std::abs(j_cand * lnr - m_cand * lnq);
            if (residual < tol)
                return PowerRelation{static_cast<int>(j_cand), static_cast<int>(m_cand),
                                     residual};
        }
        num2 = num1;
        num1 = m_cand;
        den2 = den1;
        den1 = j_cand;
        const double frac = xv - fa;
        if (frac < 1e-15)
            break;
        xv = 1.0 / frac;
    }
    return std::nullopt;
}

// Certified lower bound for ||B_q - B_r|| with its witness.
struct DistanceEstimate {
    double lower_bound = 0.0;
    double witness_x = 0.0;
    PiecewiseLinearFn witness_fn;
    int depth = 0; // node depth N of the extremal construction
    std::optional<PowerRelation> relation;
    std::optional<double> closed_form; // 2(m-1)/m when the relation is r = q^m
    bool cap_hit = false;
};

// Exact distance 2(m-1)/m when the detected relation has unit exponent on
// either side (r = q^m or q = r^j); only a lower bound exists otherwise.
inline std::optional<double> distance_closed_form(const QParam&, const QParam&,
                                                  const PowerRelation& rel) {
    if (rel.j == 1)
        return 2.0 * (rel.m - 1.0) / rel.m;
    if (rel.m == 1)
        return 2.0 * (rel.j - 1.0) / rel.j;
    return std::nullopt;
}

// Evaluate |(B_q - B_r) f_N| / ||f_N|| over the grid with the
// regime-appropriate extremal f_N and return the best witness found.
inline DistanceEstimate distance_lower_bound(const QParam& q, const QParam& r, int N,
                                             const std::vector<double>& x_grid,
                                             const TruncationPolicy& policy = {},
                                             const ExtremalOptions& opt = {}) {
    if (N < 1)
        throw std::invalid_argument("distance_lower_bound: requires N >= 1");
    if (x_grid.empty())
        throw std::invalid_argument("distance_lower_bound: x_grid must be nonempty");
    for (double x : x_grid)
        if (!(x >= 0.0 && x < 1.0))
            throw std::domain_error("distance_lower_bound: grid points must lie in [0,1)");
    if (q.value() == r.value())
        return {0.0,          x_grid.front(), PiecewiseLinearFn({0.0, 1.0}, {0.0, 0.0}),
                N,            std::nullopt,   0.0,
                false};

    const std::optional<PowerRelation> rel = detect_power_relation(q, r);
    // The commensurable construction assumes the orientation r^j = q^m with
    // m >= j; |B_q - B_r| is symmetric, so swap roles when needed.
    const bool swapped = rel.has_value() && rel->m < rel->j;
    const QParam& qa = swapped ? r : q;
    const QParam& qb = swapped ? q : r;
    const PowerRelation oriented =
        rel.has_value() ? (swapped ? PowerRelation{rel->m, rel->j, rel->residual} : *rel)
                        : PowerRelation{};

    PiecewiseLinearFn fn = rel.has_value()
                               ? build_extremal_commensurable(qa, qb, oriented, N, opt)
                               : build_extremal_disjoint(qa, qb, N, opt);
    const double norm = fn.sup_norm();

    DistanceEstimate est{0.0, x_grid.front(), std::move(fn), N, rel, std::nullopt, false};
    if (rel.has_value())
        est.closed_form = distance_closed_form(q, r, *rel);
    for (double x : x_grid) {
        const BqResult bv = apply_Bq_report(est.witness_fn, qa, x, policy);
        const BqResult rv = apply_Bq_report(est.witness_fn, qb, x, policy);
        est.cap_hit = est.cap_hit || bv.cap_hit || rv.cap_hit;
        const double d = std::abs(bv.value - rv.value) / norm;
        if (d > est.lower_bound) {
            est.lower_bound = d;
            est.witness_x = x;
        }
    }
    return est;
}

// Upper envelope for the commensurable regime r = q^m:
//   |(B_q - B_r) f(x)| <= 2 ||f|| (1 - sum_k p_{mk}(q;x))
// maximized over the grid; approaches 2(m-1)/m from above as the grid
// approaches 1.
inline double distance_upper_envelope(const QParam& q, int m,
                                      const std::vector<double>& x_grid,
                                      const TruncationPolicy& policy = {}) {
    if (x_grid.empty())
        throw std::invalid_argument("distance_upper_envelope: x_grid must be nonempty");
    double env = 0.0;
    for (double x : x_grid) {
        const StridedSum s = strided_sum(q, m, x, policy);
        env = std::max(env, 2.0 * std::max(0.0, 1.0 - s.value));
    }
    return env;
}

// Sup-norm deviations sup_x |B_q f(x) - B_a f(x)| for each q in the probe
// sequence: they shrink as q -> a even though ||B_q - B_a|| stays >= 1,
// the strong-vs-uniform operator topology contrast.
template <class F>
std::vector<double> strong_continuity_probe(F&& f, const QParam& a,
                                            const std::vector<QParam>& q_sequence,
                                            const std::vector<double>& x_grid,
                                            const TruncationPolicy& policy = {}) {
    if (x_grid.empty())
        throw std::invalid_argument("strong_continuity_probe: x_grid must be nonempty");
    std::vector<double> base;
    base.reserve(x_grid.size());
    for (double x : x_grid)
        base.push_back(apply_Bq(f, a, x, policy));
    std::vector<double> deviations;
    deviations.reserve(q_sequence.size());
    for (const QParam& qv : q_sequence) {
        double d = 0.0;
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            d = std::max(d, std::abs(apply_Bq(f, qv, x_grid[i], policy) - base[i]));
        deviations.push_back(d);
    }
    return deviations;
}

// Grid refining geometrically toward 1: x = 1 - delta with delta running
// from delta0 down to delta_min at ratio 2^{1/per_octave}, ascending in x.
inline std::vector<double> geometric_grid(double delta0, double delta_min,
                                          int per_octave = 1) {
    if (!(delta0 > 0.0 && delta0 < 1.0) || !(delta_min > 0.0) || delta_min > delta0)
        throw std::invalid_argument("geometric_grid: requires 0 < delta_min <= delta0 < 1");
    if (per_octave < 1)
        throw std::invalid_argument("geometric_grid: per_octave must be positive");
    const double ratio = std::pow(2.0, 1.0 / per_octave);
    std::vector<double> grid;
    for (double d = delta0; d > delta_min * (1.0 + 1e-12); d /= ratio)
        grid.push_back(1.0 - d);
    grid.push_back(1.0 - delta_min);
    return grid;
}

} // namespace qbern
