#pragma once

// Small statistics helpers for the audits: Kolmogorov-Smirnov distances,
// Pearson correlation, and chi-square p-values via the regularized
// incomplete gamma function.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "quasitile/errors.hpp"

namespace quasitile {

// sup_x |F_n(x) - F(x)| for a sample against a cdf.  Ties are grouped and the
// lower empirical step compares against the left limit, probed just below the
// value, so discrete laws are handled correctly.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw EmptySet("ks_distance needs samples");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        double v = sample[i];
        std::size_t before = i;
        while (i < sample.size() && sample[i] == v) ++i;
        double left = cdf(v - 1e-12 * (1.0 + std::abs(v)));
        d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(v)));
        d = std::max(d, std::abs(static_cast<double>(before) / n - left));
    }
    return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptySet("ks_two_sample needs samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson needs paired samples");
    double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0; // degenerate: constant series
    return sxy / std::sqrt(sxx * syy);
}

namespace detail {
// regularized lower incomplete gamma P(a, x), Numerical-Recipes style
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw DomainError("gamma_p domain");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        // series
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // continued fraction for Q, return 1 - Q
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return 1.0 - q;
}
} // namespace detail

// upper tail P(X >= stat) for X ~ chi^2(dof)
inline double chi_square_pvalue(double stat, int dof) {
    if (dof < 1) throw DomainError("chi_square_pvalue needs dof >= 1");
    if (stat <= 0.0) return 1.0;
    return 1.0 - detail::gamma_p(0.5 * dof, 0.5 * stat);
}

// Pearson chi-square statistic for observed counts against probabilities.
inline double chi_square_stat(const std::vector<std::size_t>& observed,
                              const std::vector<double>& probs, std::size_t total) {
    if (observed.size() != probs.size()) throw DomainError("chi_square_stat size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double expd = probs[i] * static_cast<double>(total);
        if (expd <= 0.0) throw DomainError("chi_square_stat needs positive expected counts");
        double diff = static_cast<double>(observed[i]) - expd;
        stat += diff * diff / expd;
    }
    return stat;
}

} // namespace quasitile
