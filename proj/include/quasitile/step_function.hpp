#pragma once

// Bounded right-continuous piecewise-constant functions with exact sup-norm
// arithmetic.  Value v[j] holds on [x[j-1], x[j]) with v[0] on (-inf, x[0])
// and v[k] on [x[k-1], +inf).  Canonical form: strictly increasing
// breakpoints, adjacent values distinct (exact comparison).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "quasitile/errors.hpp"

namespace quasitile {

class StepFunction {
public:
    StepFunction() : v_{0.0} {}

    static StepFunction constant(double c) {
        StepFunction f;
        f.v_ = {c};
        return f;
    }

    // 0 below x0, `height` from x0 on
    static StepFunction step_at(double x0, double height = 1.0) {
        StepFunction f;
        if (height == 0.0) return f;
        f.x_ = {x0};
        f.v_ = {0.0, height};
        return f;
    }

    // Raw constructor; canonicalizes (merges equal-value neighbors).
    static StepFunction from_breakpoints(std::vector<double> xs, std::vector<double> vs) {
        if (vs.size() != xs.size() + 1) throw DomainError("values must be breakpoints + 1");
        for (double x : xs)
            if (!std::isfinite(x)) throw DomainError("non-finite breakpoint");
        for (double v : vs)
            if (!std::isfinite(v)) throw DomainError("non-finite value");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i - 1] < xs[i])) throw DomainError("breakpoints must be strictly increasing");
        StepFunction f;
        f.x_ = std::move(xs);
        f.v_ = std::move(vs);
        f.canonicalize();
        return f;
    }

    // Counting staircase: jumps of the given sizes at sorted positions.
    static StepFunction staircase(const std::vector<double>& sorted_positions,
                                  const std::vector<double>& jump_sizes) {
        if (sorted_positions.size() != jump_sizes.size())
            throw DomainError("staircase needs one jump per position");
        std::vector<double> xs, vs{0.0};
        double acc = 0.0;
        for (std::size_t i = 0; i < sorted_positions.size(); ++i) {
            acc += jump_sizes[i];
            if (!xs.empty() && xs.back() == sorted_positions[i]) {
                vs.back() = acc;
            } else {
                xs.push_back(sorted_positions[i]);
                vs.push_back(acc);
            }
        }
        return from_breakpoints(std::move(xs), std::move(vs));
    }

    const std::vector<double>& breakpoints() const { return x_; }
    const std::vector<double>& values() const { return v_; }
    bool is_zero() const { return x_.empty() && v_[0] == 0.0; }

    // right-continuous evaluation
    double operator()(double e) const {
        std::size_t idx = std::upper_bound(x_.begin(), x_.end(), e) - x_.begin();
        return v_[idx];
    }
    // left limit
    double left_limit(double e) const {
        std::size_t idx = std::lower_bound(x_.begin(), x_.end(), e) - x_.begin();
        return v_[idx];
    }

    double sup_abs() const {
        double m = 0.0;
        for (double v : v_) m = std::max(m, std::abs(v));
        return m;
    }

    bool operator==(const StepFunction& o) const { return x_ == o.x_ && v_ == o.v_; }

    StepFunction& scale(double c) {
        if (c == 0.0) { *this = StepFunction(); return *this; }
        for (double& v : v_) v *= c;
        canonicalize();
        return *this;
    }

    template <typename Op>
    static StepFunction combine(const StepFunction& f, const StepFunction& g, Op op) {
        StepFunction r;
        r.x_.reserve(f.x_.size() + g.x_.size());
        r.v_.clear();
        r.v_.reserve(f.x_.size() + g.x_.size() + 1);
        r.v_.push_back(op(f.v_[0], g.v_[0]));
        std::size_t i = 0, j = 0;
        while (i < f.x_.size() || j < g.x_.size()) {
            double x;
            if (j == g.x_.size() || (i < f.x_.size() && f.x_[i] <= g.x_[j])) {
                x = f.x_[i];
                if (j < g.x_.size() && g.x_[j] == x) ++j;
                ++i;
            } else {
                x = g.x_[j];
                ++j;
            }
            r.x_.push_back(x);
            r.v_.push_back(op(f.v_[i], g.v_[j]));
        }
        r.canonicalize();
        return r;
    }

    friend StepFunction operator+(const StepFunction& f, const StepFunction& g) {
        return combine(f, g, [](double a, double b) { return a + b; });
    }
    friend StepFunction operator-(const StepFunction& f, const StepFunction& g) {
        return combine(f, g, [](double a, double b) { return a - b; });
    }

private:
    void canonicalize() {
        std::vector<double> xs, vs;
        xs.reserve(x_.size());
        vs.reserve(v_.size());
        vs.push_back(v_[0]);
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (v_[i + 1] == vs.back()) continue;
            xs.push_back(x_[i]);
            vs.push_back(v_[i + 1]);
        }
        x_ = std::move(xs);
        v_ = std::move(vs);
    }

    std::vector<double> x_;
    std::vector<double> v_; // x_.size() + 1 entries
};

// Exact: max over merged constancy intervals, no sampling.
inline double sup_norm_distance(const StepFunction& f, const StepFunction& g) {
    double m = 0.0;
    const auto& fx = f.breakpoints();
    const auto& gx = g.breakpoints();
    const auto& fv = f.values();
    const auto& gv = g.values();
    std::size_t i = 0, j = 0;
    m = std::abs(fv[0] - gv[0]);
    while (i < fx.size() || j < gx.size()) {
        if (j == gx.size() || (i < fx.size() && fx[i] <= gx[j])) {
            if (j < gx.size() && gx[j] == fx[i]) ++j;
            ++i;
        } else {
            ++j;
        }
        m = std::max(m, std::abs(fv[i] - gv[j]));
    }
    return m;
}

inline double sup_norm(const StepFunction& f) { return f.sup_abs(); }

// Pairwise (tree) reduction: deterministic and accurate for long sums.
inline StepFunction sum_tree(std::vector<StepFunction> terms) {
    if (terms.empty()) return StepFunction();
    while (terms.size() > 1) {
        std::vector<StepFunction> next;
        next.reserve((terms.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(terms[i] + terms[i + 1]);
        if (terms.size() % 2 == 1) next.push_back(terms.back());
        terms = std::move(next);
    }
    return terms[0];
}

inline StepFunction linear_combination(const std::vector<std::pair<double, StepFunction>>& terms) {
    std::vector<StepFunction> scaled;
    scaled.reserve(terms.size());
    for (const auto& [c, f] : terms) {
        StepFunction s = f;
        s.scale(c);
        scaled.push_back(std::move(s));
    }
    return sum_tree(std::move(scaled));
}

// Total variation carried by jumps (sum of |jump| sizes).
inline double total_jump_mass(const StepFunction& f) {
    double m = 0.0;
    const auto& v = f.values();
    for (std::size_t i = 1; i < v.size(); ++i) m += std::abs(v[i] - v[i - 1]);
    return m;
}

} // namespace quasitile
