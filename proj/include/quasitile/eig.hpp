#pragma once

// Dense symmetric eigenvalues (Householder tridiagonalization + implicit-shift
// QL) and spectrum slicing via LDL^T inertia counts, both self-contained.
// The two routes are algorithmically independent, which lets tests use one as
// an oracle for the other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "quasitile/errors.hpp"

namespace quasitile {

// Reduce a symmetric matrix (row-major, n x n) to tridiagonal form; returns
// diagonal d[0..n-1] and subdiagonal e[1..n-1] (e[0] unused).
inline void householder_tridiag(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                                std::vector<double>& e) {
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    if (n == 0) return;
    for (std::size_t i = n - 1; i >= 1; --i) {
        std::size_t l = i;
        double h = 0.0, scale = 0.0;
        if (l > 1) {
            for (std::size_t k = 0; k < l; ++k) scale += std::abs(a[i * n + k]);
            if (scale == 0.0) {
                e[i] = a[i * n + (l - 1)];
            } else {
                for (std::size_t k = 0; k < l; ++k) {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                double f = a[i * n + (l - 1)];
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a[i * n + (l - 1)] = f - g;
                f = 0.0;
                for (std::size_t j = 0; j < l; ++j) {
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
                    for (std::size_t k = j + 1; k < l; ++k) g += a[k * n + j] * a[i * n + k];
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                double hh = f / (h + h);
                for (std::size_t j = 0; j < l; ++j) {
                    f = a[i * n + j];
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k)
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                }
            }
        } else {
            e[i] = a[i * n + (l - 1)];
        }
        d[i] = h;
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i];
}

// Eigenvalues of a symmetric tridiagonal matrix by QL with implicit shifts.
inline std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e) {
    const std::size_t n = d.size();
    if (n == 0) return {};
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 60) throw EigensolverFailure("QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m - 1;; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (i == l) break;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

inline std::vector<double> sym_eigenvalues(std::vector<double> a, std::size_t n) {
    std::vector<double> d, e;
    householder_tridiag(a, n, d, e);
    return tridiag_eigenvalues(std::move(d), std::move(e));
}

// Symmetric band matrix, lower storage: band[k][j] = A(j+k, j) for
// 0 <= k <= bw, 0 <= j < n (entries past the edge are zero).
struct BandedSym {
    std::size_t n = 0;
    std::size_t bw = 0;
    std::vector<double> a; // (bw+1) * n, diagonal-major

    double& at(std::size_t k, std::size_t j) { return a[k * n + j]; }
    double at(std::size_t k, std::size_t j) const { return a[k * n + j]; }

    static BandedSym zeros(std::size_t n, std::size_t bw) {
        BandedSym b;
        b.n = n;
        b.bw = bw;
        b.a.assign((bw + 1) * n, 0.0);
        return b;
    }
};

struct Inertia {
    std::size_t negative = 0;
    std::size_t zero = 0; // pivots clamped by the guard
};

// Inertia of (A - shift I) by banded LDL^T without pivoting (spectrum
// slicing).  Near-zero pivots are counted separately so callers can widen
// count enclosures instead of trusting a sign.
inline Inertia ldlt_inertia_banded(const BandedSym& m, double shift, double pivot_guard = 1e-11) {
    const std::size_t n = m.n, bw = m.bw;
    Inertia out;
    if (n == 0) return out;
    // work holds the active lower-triangular window, column-major by band
    std::vector<double> w((bw + 1) * n);
    for (std::size_t k = 0; k <= bw; ++k)
        for (std::size_t j = 0; j < n; ++j) w[k * n + j] = m.a[k * n + j];
    for (std::size_t j = 0; j < n; ++j) w[j] -= shift;

    for (std::size_t j = 0; j < n; ++j) {
        double piv = w[j];
        if (std::abs(piv) < pivot_guard) {
            ++out.zero;
            piv = piv < 0.0 ? -pivot_guard : pivot_guard;
        } else if (piv < 0.0) {
            ++out.negative;
        }
        std::size_t reach = std::min(bw, n - 1 - j);
        for (std::size_t r = 1; r <= reach; ++r) {
            double lr = w[r * n + j] / piv;
            // rank-one update of column j+r, rows j+r .. j+reach
            for (std::size_t s = r; s <= reach; ++s)
                w[(s - r) * n + (j + r)] -= lr * w[s * n + j];
        }
    }
    return out;
}

// Dense LDL^T inertia (no pivoting); independent oracle for eigenvalue
// counting on small instances.
inline Inertia sylvester_inertia_dense(std::vector<double> a, std::size_t n, double shift,
                                       double pivot_guard = 1e-11) {
    Inertia out;
    for (std::size_t j = 0; j < n; ++j) a[j * n + j] -= shift;
    for (std::size_t j = 0; j < n; ++j) {
        double piv = a[j * n + j];
        if (std::abs(piv) < pivot_guard) {
            ++out.zero;
            piv = piv < 0.0 ? -pivot_guard : pivot_guard;
        } else if (piv < 0.0) {
            ++out.negative;
        }
        for (std::size_t r = j + 1; r < n; ++r) {
            double lr = a[r * n + j] / piv;
            for (std::size_t s = j + 1; s <= r; ++s) a[r * n + s] -= lr * a[s * n + j];
        }
    }
    return out;
}

} // namespace quasitile
