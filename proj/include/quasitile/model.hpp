#pragma once

// Random colorings of group vertices.  Product models draw each site from an
// independent stream keyed by (seed, site), so restriction, window extension
// and translation behave consistently.  Block models aggregate a hidden
// i.i.d. field over the radius-rho ball, giving declared correlation length
// r = 2 rho.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "quasitile/errors.hpp"
#include "quasitile/geometry.hpp"
#include "quasitile/rng.hpp"
#include "quasitile/step_function.hpp"

namespace quasitile {

struct ColorDistribution {
    enum class Kind { FinitePmf, DyadicUniform };
    Kind kind = Kind::FinitePmf;
    std::vector<double> support; // strictly sorted (FinitePmf)
    std::vector<double> weights; // positive, sum 1

    static ColorDistribution finite(std::vector<double> support, std::vector<double> weights) {
        if (support.size() != weights.size() || support.empty())
            throw DomainError("pmf needs matching nonempty support/weights");
        for (std::size_t i = 1; i < support.size(); ++i)
            if (!(support[i - 1] < support[i])) throw DomainError("pmf support must be strictly sorted");
        double s = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw DomainError("pmf weights must be positive");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-12) throw DomainError("pmf weights must sum to 1");
        ColorDistribution d;
        d.kind = Kind::FinitePmf;
        d.support = std::move(support);
        d.weights = std::move(weights);
        return d;
    }
    static ColorDistribution bernoulli(double p) { return finite({0.0, 1.0}, {1.0 - p, p}); }
    static ColorDistribution atom(double a) { return finite({a}, {1.0}); }
    static ColorDistribution dyadic_uniform() {
        ColorDistribution d;
        d.kind = Kind::DyadicUniform;
        return d;
    }

    double draw(double u01) const {
        if (kind == Kind::DyadicUniform)
            return std::floor(u01 * 1073741824.0) / 1073741824.0; // k / 2^30
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u01 < acc) return support[i];
        }
        return support.back();
    }

    double cdf(double e) const {
        if (kind == Kind::DyadicUniform) {
            if (e < 0.0) return 0.0;
            double k = std::floor(e * 1073741824.0) + 1.0;
            return std::min(1.0, k / 1073741824.0);
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (support[i] <= e) acc += weights[i];
            else break;
        }
        return acc;
    }
};

struct RandomModel {
    enum class Dependence { Product, Block };
    enum class Aggregator { Max, MeanThenQuantize };

    ColorDistribution law;
    Dependence dependence = Dependence::Product;
    int rho = 0;
    Aggregator aggregator = Aggregator::Max;

    int correlation_length() const { return dependence == Dependence::Product ? 0 : 2 * rho; }

    static RandomModel product(ColorDistribution law) {
        RandomModel m;
        m.law = std::move(law);
        return m;
    }
    static RandomModel block(ColorDistribution law, int rho, Aggregator agg) {
        if (rho < 1) throw DomainError("block model needs rho >= 1");
        RandomModel m;
        m.law = std::move(law);
        m.dependence = Dependence::Block;
        m.rho = rho;
        m.aggregator = agg;
        return m;
    }
};

struct Coloring {
    FiniteSubset window;
    std::vector<double> values; // parallel to window.elements()

    double at(const GroupElement& g) const {
        std::size_t idx = window.index_of(g);
        if (idx == FiniteSubset::npos) throw OutOfWindow("coloring queried outside its window");
        return values[idx];
    }
};

namespace detail {
constexpr std::uint64_t kColorTag = 0x10;
constexpr std::uint64_t kHiddenTag = 0x11;

inline double site_uniform(std::uint64_t seed, std::uint64_t tag, const GroupElement& g) {
    KeyedStream ks(seed);
    ks.absorb(tag);
    g.absorb_into(ks);
    return ks.uniform01();
}

inline double hidden_value(const RandomModel& m, std::uint64_t seed, const GroupElement& g) {
    return m.law.draw(site_uniform(seed, kHiddenTag, g));
}

inline double quantize_to_support(const ColorDistribution& law, double x) {
    if (law.kind == ColorDistribution::Kind::DyadicUniform)
        return std::floor(x * 1073741824.0) / 1073741824.0;
    // largest support value <= x, else the smallest
    auto it = std::upper_bound(law.support.begin(), law.support.end(), x);
    if (it == law.support.begin()) return law.support.front();
    return *(it - 1);
}
} // namespace detail

inline Coloring sample_coloring(const RandomModel& m, const FiniteSubset& window,
                                std::uint64_t seed) {
    if (window.empty()) throw EmptySet("sample_coloring needs a nonempty window");
    Coloring c;
    c.window = window;
    c.values.reserve(window.size());
    if (m.dependence == RandomModel::Dependence::Product) {
        for (const auto& g : window.elements())
            c.values.push_back(m.law.draw(detail::site_uniform(seed, detail::kColorTag, g)));
        return c;
    }
    const GroupDescriptor& gd = window.group();
    FiniteSubset b = ball(gd, m.rho);
    for (const auto& g : window.elements()) {
        double agg;
        if (m.aggregator == RandomModel::Aggregator::Max) {
            agg = -std::numeric_limits<double>::infinity();
            for (const auto& h : b.elements())
                agg = std::max(agg, detail::hidden_value(m, seed, multiply(gd, h, g)));
        } else {
            double s = 0.0;
            for (const auto& h : b.elements()) s += detail::hidden_value(m, seed, multiply(gd, h, g));
            agg = detail::quantize_to_support(m.law, s / static_cast<double>(b.size()));
        }
        c.values.push_back(agg);
    }
    return c;
}

// (tau_g omega)_x = omega_{x g}; the result lives on window * g^{-1}.
inline Coloring translate_coloring(const Coloring& c, const GroupElement& g) {
    const GroupDescriptor& gd = c.window.group();
    FiniteSubset w = translate_set(c.window, inverse(gd, g));
    Coloring out;
    out.window = w;
    out.values.reserve(w.size());
    for (const auto& x : w.elements()) out.values.push_back(c.at(multiply(gd, x, g)));
    return out;
}

inline Coloring restrict_coloring(const Coloring& c, const FiniteSubset& lam) {
    Coloring out;
    out.window = lam;
    out.values.reserve(lam.size());
    for (const auto& x : lam.elements()) {
        std::size_t idx = c.window.index_of(x);
        if (idx == FiniteSubset::npos) throw OutOfWindow("restriction outside the coloring window");
        out.values.push_back(c.values[idx]);
    }
    return out;
}

// Exact single-site distribution function of omega_id.
struct MarginalCdf {
    bool has_step = false;
    StepFunction step;                   // exact staircase when available
    std::function<double(double)> eval;  // always usable
    std::string kind;
};

inline MarginalCdf marginal_cdf(const RandomModel& m) {
    MarginalCdf out;
    if (m.dependence == RandomModel::Dependence::Product) {
        out.kind = "product";
        if (m.law.kind == ColorDistribution::Kind::FinitePmf) {
            std::vector<double> jumps = m.law.weights;
            out.step = StepFunction::staircase(m.law.support, jumps);
            out.has_step = true;
        }
        ColorDistribution law = m.law;
        out.eval = [law](double e) { return law.cdf(e); };
        return out;
    }
    // Block marginals depend on the ball size; use marginal_cdf_for(model, group).
    throw Unsupported("block-model marginal needs the group; use marginal_cdf_for");
}

// Group-aware variant: resolves the ball size for block models.
inline MarginalCdf marginal_cdf_for(const RandomModel& m, const GroupDescriptor& gd) {
    if (m.dependence == RandomModel::Dependence::Product) return marginal_cdf(m);
    if (m.aggregator != RandomModel::Aggregator::Max ||
        m.law.kind != ColorDistribution::Kind::FinitePmf)
        throw Unsupported("no closed-form marginal for this aggregator; use Monte Carlo");
    // P(max over ball <= e) = F(e)^{|B_rho|}
    MarginalCdf out;
    out.kind = "block-max";
    std::size_t bsize = ball(gd, m.rho).size();
    ColorDistribution law = m.law;
    out.eval = [law, bsize](double e) {
        return std::pow(law.cdf(e), static_cast<double>(bsize));
    };
    std::vector<double> vals, jumps;
    double prev = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < m.law.support.size(); ++i) {
        acc += m.law.weights[i];
        double here = std::pow(acc, static_cast<double>(bsize));
        vals.push_back(m.law.support[i]);
        jumps.push_back(here - prev);
        prev = here;
    }
    out.step = StepFunction::staircase(vals, jumps);
    out.has_step = true;
    return out;
}

// All colorings of a window with their product weights.  Finite product
// models only; block models are enumerated through their hidden field on
// Lambda union d^rho(Lambda) by the caller.
inline std::vector<std::pair<Coloring, double>> enumerate_window_measure(
    const RandomModel& m, const FiniteSubset& lam, std::size_t config_cap = (1u << 20)) {
    if (m.dependence != RandomModel::Dependence::Product)
        throw Unsupported("enumerate_window_measure handles product models");
    if (m.law.kind != ColorDistribution::Kind::FinitePmf)
        throw Unsupported("enumerate_window_measure needs a finite color law");
    const std::size_t s = m.law.support.size();
    double logcount = static_cast<double>(lam.size()) * std::log(static_cast<double>(s));
    if (logcount > std::log(static_cast<double>(config_cap)) + 1e-9)
        throw ResourceLimit("window enumeration exceeds configuration cap");

    std::vector<std::pair<Coloring, double>> out;
    std::vector<std::size_t> idx(lam.size(), 0);
    while (true) {
        Coloring c;
        c.window = lam;
        double w = 1.0;
        c.values.reserve(lam.size());
        for (std::size_t k = 0; k < lam.size(); ++k) {
            c.values.push_back(m.law.support[idx[k]]);
            w *= m.law.weights[idx[k]];
        }
        out.emplace_back(std::move(c), w);
        std::size_t k = lam.size();
        while (k > 0 && idx[k - 1] == s - 1) idx[--k] = 0;
        if (k == 0) break;
        ++idx[k - 1];
    }
    return out;
}

} // namespace quasitile
