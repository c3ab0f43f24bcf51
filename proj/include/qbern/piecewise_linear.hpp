#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qbern {

// Continuous piecewise-linear function on [0,1] through sorted breakpoints.
// The sup-norm is attained at a breakpoint, which keeps norm-one extremal
// constructions exact.
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn(std::vector<double> breakpoints, std::vector<double> values)
        : xs_(std::move(breakpoints)), ys_(std::move(values)) {
        validate();
    }

    double operator()(double t) const {
        if (!(t >= 0.0 && t <= 1.0))
            throw std::domain_error("PiecewiseLinearFn: argument outside [0,1]");
        auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
        if (it == xs_.begin())
            return ys_.front();
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        if (i + 1 >= xs_.size())
            return ys_.back(); // t == 1
        const double w = (t - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + w * (ys_[i + 1] - ys_[i]);
    }

    double sup_norm() const {
        double n = 0.0;
        for (double y : ys_)
            n = std::max(n, std::abs(y));
        return n;
    }

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }

private:
    void validate() const {
        if (xs_.size() != ys_.size())
            throw std::invalid_argument("PiecewiseLinearFn: breakpoint/value size mismatch");
        if (xs_.size() < 2)
            throw std::invalid_argument("PiecewiseLinearFn: needs at least two breakpoints");
        if (xs_.front() != 0.0 || xs_.back() != 1.0)
            throw std::invalid_argument("PiecewiseLinearFn: breakpoints must span [0,1]");
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            if (!(xs_[i] < xs_[i + 1]))
                throw std::invalid_argument("PiecewiseLinearFn: breakpoints must be strictly increasing");
        for (double v : ys_)
            if (!std::isfinite(v))
                throw std::invalid_argument("PiecewiseLinearFn: values must be finite");
    }

    std::vector<double> xs_;
    std::vector<double> ys_;
};

// Text format: one "x,y" pair per line; blank lines and lines starting with
// '#' are ignored; breakpoints must be sorted and include x=0 and x=1.
inline PiecewiseLinearFn read_piecewise_linear(std::istream& in) {
    std::vector<double> xs, ys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#')
            continue;
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos)
            throw std::runtime_error("piecewise-linear input line " + std::to_string(lineno) +
                                     ": expected \"x,y\"");
        std::size_t used1 = 0, used2 = 0;
        double x = 0.0, y = 0.0;
        try {
            x = std::stod(line.substr(start, comma - start), &used1);
            y = std::stod(line.substr(comma + 1), &used2);
        } catch (const std::exception&) {
            throw std::runtime_error("piecewise-linear input line " + std::to_string(lineno) +
                                     ": malformed number");
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    try {
        return PiecewiseLinearFn(std::move(xs), std::move(ys));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("piecewise-linear input: ") + e.what());
    }
}

inline void write_piecewise_linear(std::ostream& out, const PiecewiseLinearFn& f) {
    char buf[64];
    const auto& xs = f.breakpoints();
    const auto& ys = f.values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", xs[i], ys[i]);
        out << buf;
    }
}

} // namespace qbern
