#pragma once

// q-series building blocks:
//
//   (a;q)_k   = prod_{s=0}^{k-1} (1 - a q^s)        finite q-Pochhammer
//   (a;q)_inf = prod_{s>=0}     (1 - a q^s)         infinite q-Pochhammer
//   p_k(q;x)  = x^k (x;q)_inf / (q;q)_k             q-deformed Poisson weights
//
// The weights are nonnegative on [0,1], sum to 1 for x in [0,1), and all
// vanish at x = 1.  Tail estimates throughout rely on the elementary bound
// 1 >= prod_{s>=S}(1 - a q^s) >= 1 - a q^S/(1-q) for 0 <= a < 1.

#include "truncation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbern {

// The deformation parameter, pinned to the open interval (0,1).
class QParam {
public:
    explicit QParam(double q) : q_(q) {
        if (!std::isfinite(q) || !(q > 0.0 && q < 1.0))
            throw std::invalid_argument("QParam: q must lie strictly inside (0,1)");
    }
    double value() const { return q_; }

private:
    double q_;
};

// (a;q)_k = prod_{s=0}^{k-1}(1 - a q^s); empty product for k = 0.
inline double qpoch_finite(double a, const QParam& q, int k) {
    if (k < 0)
        throw std::invalid_argument("qpoch_finite: k must be nonnegative");
    double p = 1.0;
    double aq = a;
    for (int s = 0; s < k; ++s) {
        p *= 1.0 - aq;
        aq *= q.value();
    }
    return p;
}

// (a;q)_inf for 0 <= a < 1, truncated once the remaining factors are
// provably within eps_tail of 1:  |log prod_{s>=S}(1-aq^s)| <= aq^S/(1-q).
inline Truncated qpoch_inf(double a, const QParam& q, const TruncationPolicy& policy = {}) {
    policy.validate();
    if (!(a >= 0.0 && a < 1.0))
        throw std::domain_error("qpoch_inf: requires 0 <= a < 1");
    const double qv = q.value();
    double p = 1.0;
    double aq = a; // a q^s for the next factor
    std::size_t s = 0;
    while (aq / (1.0 - qv) >= policy.eps_tail) {
        if (s >= policy.max_terms)
            return {p, p * aq / (1.0 - qv), true};
        p *= 1.0 - aq;
        aq *= qv;
        ++s;
    }
    return {p, p * aq / (1.0 - qv), false};
}

// p_k(q;x) = x^k (x;q)_inf / (q;q)_k with the conventions p_k(q;1) = 0 and
// p_k(q;0) = [k == 0]  (0^0 = 1, so B_q f(0) = f(0)).
inline Truncated weight_pk(const QParam& q, double x, int k,
                           const TruncationPolicy& policy = {}) {
    if (k < 0)
        throw std::invalid_argument("weight_pk: k must be nonnegative");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("weight_pk: requires 0 <= x <= 1");
    if (x == 1.0)
        return {0.0, 0.0, false};
    if (x == 0.0)
        return {k == 0 ? 1.0 : 0.0, 0.0, false};
    const Truncated poch = qpoch_inf(x, q, policy);
    const double denom = qpoch_finite(q.value(), q, k);
    const double xk = std::pow(x, k);
    return {xk * poch.value / denom, xk * poch.tail_bound / denom, poch.cap_hit};
}

// The full weight sequence p_0..p_K at fixed (q,x), plus a closed-form
// estimate of the dropped tail sum_{k>K} p_k.
//
// When the plain geometric cutoff (tail <= eps_tail) is reachable within
// max_terms the sequence is summed explicitly and tail_mass <= eps_tail.
// Near x = 1 that cutoff can require ~1/(1-x) terms, so instead the loop
// stops once the *uncertainty* of the closed-form tail is below eps_tail:
// with pref = (x;q)_inf/(q;q)_inf,
//
//   sum_{k>K} p_k  =  pref x^{K+1}/(1-x) - delta,
//   0 <= delta <= E(K) = pref (q/(1-q)) (xq)^{K+1} / (1-xq),
//
// because p_k = pref x^k (q^{k+1};q)_inf and 1 >= (q^{k+1};q)_inf >=
// 1 - q^{k+1}/(1-q).  tail_mass carries the closed form, tail_err its
// certified error, and total() stays within tail_err of 1.
struct WeightSeries {
    double q = 0.0;
    double x = 0.0;
    std::vector<double> weights; // p_0 .. p_K
    double tail_mass = 0.0;      // closed-form estimate of sum_{k>K} p_k
    double tail_err = 0.0;       // certified bound on |true tail - tail_mass|
    double tail_bound = 0.0;     // bound on |1 - partial_sum()| for x in [0,1)
    bool cap_hit = false;

    double partial_sum() const {
        NeumaierSum s;
        for (double w : weights)
            s.add(w);
        return s.value();
    }
    double total() const { return partial_sum() + tail_mass; }
};

inline WeightSeries weight_series(const QParam& q, double x,
                                  const TruncationPolicy& policy = {}) {
    policy.validate();
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("weight_series: requires 0 <= x <= 1");
    WeightSeries ws;
    ws.q = q.value();
    ws.x = x;
    if (x == 1.0) {
        ws.weights = {0.0};
        return ws;
    }
    if (x == 0.0) {
        ws.weights = {1.0};
        return ws;
    }
    const double qv = q.value();
    const Truncated poch_x = qpoch_inf(x, q, policy);
    const Truncated poch_q = qpoch_inf(qv, q, policy);
    ws.cap_hit = poch_x.cap_hit || poch_q.cap_hit;
    const double pref = poch_x.value / poch_q.value;
    // relative slack the two truncated products contribute to every weight
    const double prod_slack = poch_x.tail_bound / poch_x.value +
                              poch_q.tail_bound / poch_q.value;

    // Is the explicit geometric cutoff reachable within the term budget?
    const double cut = policy.eps_tail * (1.0 - x) / pref;
    const bool explicit_feasible =
        cut >= 1.0 ||
        std::log(cut) / std::log(x) <= static_cast<double>(policy.max_terms) - 1.0;

    double w = poch_x.value; // p_0
    ws.weights.push_back(w);
    double xpow = x;   // x^{k+1}
    double qkp1 = qv;  // q^{k+1}
    const double tail_coeff = pref * qv / ((1.0 - qv) * (1.0 - x * qv));
    for (;;) {
        const double t0 = pref * xpow / (1.0 - x);
        const double err = tail_coeff * xpow * qkp1;
        if (t0 <= policy.eps_tail) {
            ws.tail_mass = t0;
            ws.tail_err = std::min(err, t0);
            break;
        }
        if (!explicit_feasible && err <= 0.5 * policy.eps_tail) {
            ws.tail_mass = t0;
            ws.tail_err = err;
            break;
        }
        if (ws.weights.size() >= policy.max_terms) {
            ws.cap_hit = true;
            ws.tail_mass = t0;
            ws.tail_err = std::min(err, t0);
            break;
        }
        w *= x / (1.0 - qkp1);
        ws.weights.push_back(w);
        xpow *= x;
        qkp1 *= qv;
    }
    ws.tail_bound = ws.tail_mass + ws.tail_err + prod_slack;
    return ws;
}

// Independent evaluation of the series side of Euler's identity,
// sum_{k>=0} x^k/(q;q)_k = 1/(x;q)_inf, with the same closed-form tail
// device as weight_series (here pref = 1/(q;q)_inf).
inline Truncated euler_series_sum(const QParam& q, double x,
                                  const TruncationPolicy& policy = {}) {
    policy.validate();
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("euler_series_sum: requires 0 <= x < 1");
    const double qv = q.value();
    const Truncated poch_q = qpoch_inf(qv, q, policy);
    bool cap = poch_q.cap_hit;
    const double pref = 1.0 / poch_q.value;

    const double cut = policy.eps_tail * (1.0 - x) / pref;
    const bool explicit_feasible =
        cut >= 1.0 ||
        std::log(cut) / std::log(x) <= static_cast<double>(policy.max_terms) - 1.0;

    NeumaierSum sum;
    double t = 1.0; // x^k/(q;q)_k
    sum.add(t);
    std::size_t terms = 1;
    double xpow = x;
    double qkp1 = qv;
    const double tail_coeff = pref * qv / ((1.0 - qv) * (1.0 - x * qv));
    double tail_mass = 0.0, tail_err = 0.0;
    for (;;) {
        const double t0 = pref * xpow / (1.0 - x);
        const double err = tail_coeff * xpow * qkp1;
        if (t0 <= policy.eps_tail || (!explicit_feasible && err <= 0.5 * policy.eps_tail)) {
            tail_mass = t0;
            tail_err = std::min(err, t0);
            break;
        }
        if (terms >= policy.max_terms) {
            cap = true;
            tail_mass = t0;
            tail_err = std::min(err, t0);
            break;
        }
        t *= x / (1.0 - qkp1);
        sum.add(t);
        ++terms;
        xpow *= x;
        qkp1 *= qv;
    }
    const double value = sum.value() + tail_mass;
    const double slack = poch_q.tail_bound / poch_q.value * value;
    return {value, tail_err + slack, cap};
}

// Strided weight sum sum_{k>=0} p_{mk}(q;x) together with its sandwich
// envelopes.  As x -> 1- the sum and both envelopes tend to 1/m:
//
//   (x;q)_inf/(x^m;q)_inf  <=  sum_k p_{mk}(q;x)  <=  (x;q)_inf/((q;q)_inf (1-x^m))
//
// (lower: drop the finite (q;q)_k below (x^m;q)-grade terms; upper: replace
// every (q^{mk+1};q)_inf by 1 and sum the geometric series in x^m).
struct StridedSum {
    double value = 0.0;
    double lower_env = 0.0;
    double upper_env = 0.0;
    double tail_err = 0.0; // certified bound on |value - true sum|
    bool cap_hit = false;
};

inline StridedSum strided_sum(const QParam& q, int m, double x,
                              const TruncationPolicy& policy = {}) {
    policy.validate();
    if (m < 2)
        throw std::invalid_argument("strided_sum: requires m >= 2");
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("strided_sum: requires 0 <= x < 1");
    const double qv = q.value();
    const double xm = std::pow(x, m);
    const Truncated poch_x = qpoch_inf(x, q, policy);
    const Truncated poch_q = qpoch_inf(qv, q, policy);
    const Truncated poch_xm = qpoch_inf(xm, q, policy);

    StridedSum out;
    out.cap_hit = poch_x.cap_hit || poch_q.cap_hit || poch_xm.cap_hit;
    out.lower_env = poch_x.value / poch_xm.value;
    out.upper_env = poch_x.value / (poch_q.value * (1.0 - xm));

    const double pref = poch_x.value / poch_q.value;
    const double prod_slack = poch_x.tail_bound / poch_x.value +
                              poch_q.tail_bound / poch_q.value;
    const double qm = std::pow(qv, m);
    const double xmqm = xm * qm;

    // explicit cutoff needs x^{m(t+1)} pref/(1-x^m) <= eps within max_terms steps
    const double cut = policy.eps_tail * (1.0 - xm) / pref;
    const bool explicit_feasible =
        cut >= 1.0 ||
        std::log(cut) / std::log(x) <= static_cast<double>(policy.max_terms) - 1.0;

    NeumaierSum sum;
    double w = poch_x.value; // p_{mk}, starting at p_0
    sum.add(w);
    std::size_t idx = 0;    // flat index mk
    double qidx = 1.0;      // q^idx
    double xmpow = xm;      // x^{m(t+1)}
    double xmqmpow = xmqm;  // (x^m q^m)^{t+1}
    const double tail_coeff = pref * qv / ((1.0 - qv) * (1.0 - xmqm));
    double tail_mass = 0.0, tail_err = 0.0;
    for (;;) {
        const double t0 = pref * xmpow / (1.0 - xm);
        const double err = tail_coeff * xmqmpow;
        if (t0 <= policy.eps_tail || (!explicit_feasible && err <= 0.5 * policy.eps_tail)) {
            tail_mass = t0;
            tail_err = std::min(err, t0);
            break;
        }
        if (idx + static_cast<std::size_t>(m) > policy.max_terms) {
            out.cap_hit = true;
            tail_mass = t0;
            tail_err = std::min(err, t0);
            break;
        }
        for (int step = 0; step < m; ++step) {
            qidx *= qv;
            w *= x / (1.0 - qidx);
        }
        idx += static_cast<std::size_t>(m);
        sum.add(w);
        xmpow *= xm;
        xmqmpow *= xmqm;
    }
    out.value = sum.value() + tail_mass;
    out.tail_err = tail_err + prod_slack * out.value;
    return out;
}

// Margin of the strided-weight inequality p_{mk}(q;x) <= p_k(q^m;x);
// nonnegative (up to roundoff) on the whole parameter range.
inline double fedja_margin(const QParam& q, int m, int k, double x,
                           const TruncationPolicy& policy = {}) {
    if (m < 2)
        throw std::invalid_argument("fedja_margin: requires m >= 2");
    if (k < 0)
        throw std::invalid_argument("fedja_margin: k must be nonnegative");
    const QParam qm(std::pow(q.value(), m));
    const double coarse = weight_pk(qm, x, k, policy).value;
    const double fine = weight_pk(q, x, m * k, policy).value;
    return coarse - fine;
}

// alpha_k solving (1-alpha_k)^{m-1} = prod_{l=1}^{m-1} (1 - q^{mk+l});
// satisfies alpha_k >= q^{mk+m/2} by AM-GM, with equality at m = 2.
inline double alpha_k(const QParam& q, int m, int k) {
    if (m < 2)
        throw std::invalid_argument("alpha_k: requires m >= 2");
    if (k < 1)
        throw std::invalid_argument("alpha_k: requires k >= 1");
    const double lnq = std::log(q.value());
    double acc = 0.0;
    for (int l = 1; l < m; ++l)
        acc += std::log1p(-std::exp((static_cast<double>(m) * k + l) * lnq));
    return -std::expm1(acc / (m - 1));
}

} // namespace qbern
