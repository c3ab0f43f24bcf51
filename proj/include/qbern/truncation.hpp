#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace qbern {

// Budget for truncating infinite products and series.  Every truncated
// quantity either meets eps_tail or comes back with its cap_hit flag set.
struct TruncationPolicy {
    double eps_tail = 1e-14;
    std::size_t max_terms = 1000000;

    void validate() const {
        if (!(eps_tail > 0.0) || !std::isfinite(eps_tail))
            throw std::invalid_argument("TruncationPolicy: eps_tail must be a positive real");
        if (max_terms < 1)
            throw std::invalid_argument("TruncationPolicy: max_terms must be at least 1");
    }
};

// Scalar result carrying a certified bound on the omitted remainder.
struct Truncated {
    double value = 0.0;
    double tail_bound = 0.0;
    bool cap_hit = false;
};

// Kahan-Babuska-Neumaier compensated accumulator.  Long sums of small
// positive terms must survive 1e-12 normalization checks, so plain
// left-to-right addition is not enough.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace qbern
