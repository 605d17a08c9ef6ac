#pragma once

// JSON / CSV interfaces: group and Folner descriptors, subsets, models,
// tilings, experiment configs, and the report emitters.  All output is
// byte-deterministic for a fixed input.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasitile/errors.hpp"
#include "quasitile/fields.hpp"
#include "quasitile/geometry.hpp"
#include "quasitile/harness.hpp"
#include "quasitile/model.hpp"
#include "quasitile/resampling.hpp"
#include "quasitile/tiling.hpp"

namespace quasitile {

using nlohmann::json;

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- group / element / subset ----------------------------------------------

inline json to_json(const GroupDescriptor& g) {
    json j;
    j["kind"] = group_kind_name(g.kind);
    if (g.kind == GroupKind::ZPowD) j["d"] = g.dim;
    return j;
}

inline GroupDescriptor group_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "ZPowD") return GroupDescriptor::zd(j.at("d").get<int>());
    if (kind == "Heisenberg3") return GroupDescriptor::heisenberg();
    if (kind == "Lamplighter") return GroupDescriptor::lamplighter();
    throw DomainError("unknown group kind: " + kind);
}

inline json to_json(const GroupDescriptor& g, const GroupElement& e) {
    if (g.kind == GroupKind::Lamplighter) {
        json j;
        j["pos"] = e.z[0];
        j["lamps"] = e.lamps;
        return j;
    }
    return json(e.z);
}

inline GroupElement element_from_json(const GroupDescriptor& g, const json& j) {
    GroupElement e;
    if (g.kind == GroupKind::Lamplighter) {
        e.z = {j.at("pos").get<std::int64_t>()};
        e.lamps = j.at("lamps").get<std::vector<std::int64_t>>();
    } else {
        e.z = j.get<std::vector<std::int64_t>>();
    }
    check_shape(g, e);
    return e;
}

inline json to_json(const FiniteSubset& s) {
    json arr = json::array();
    for (const auto& e : s.elements()) arr.push_back(to_json(s.group(), e));
    return arr;
}

inline FiniteSubset subset_from_json(const GroupDescriptor& g, const json& j) {
    std::vector<GroupElement> elems;
    for (const auto& e : j) elems.push_back(element_from_json(g, e));
    return FiniteSubset::from_elements(g, std::move(elems));
}

inline json to_json(const FolnerSpec& s) {
    json j;
    j["group"] = to_json(s.group);
    j["generator"] = s.generator;
    j["indices"] = s.indices;
    j["nested"] = s.nested;
    return j;
}

// ---- model / field ----------------------------------------------------------

inline json to_json(const RandomModel& m) {
    json j;
    if (m.law.kind == ColorDistribution::Kind::DyadicUniform) {
        j["law"] = {{"kind", "dyadic_uniform"}};
    } else {
        j["law"] = {{"kind", "finite"}, {"support", m.law.support}, {"weights", m.law.weights}};
    }
    if (m.dependence == RandomModel::Dependence::Product) {
        j["dependence"] = {{"kind", "product"}};
    } else {
        j["dependence"] = {{"kind", "block"},
                           {"rho", m.rho},
                           {"aggregator", m.aggregator == RandomModel::Aggregator::Max
                                              ? "max"
                                              : "mean_then_quantize"}};
    }
    j["correlation_length"] = m.correlation_length();
    return j;
}

inline RandomModel model_from_json(const json& j) {
    const json& lawj = j.at("law");
    std::string lk = lawj.at("kind").get<std::string>();
    ColorDistribution law;
    if (lk == "dyadic_uniform") {
        law = ColorDistribution::dyadic_uniform();
    } else if (lk == "finite") {
        law = ColorDistribution::finite(lawj.at("support").get<std::vector<double>>(),
                                        lawj.at("weights").get<std::vector<double>>());
    } else if (lk == "bernoulli") {
        law = ColorDistribution::bernoulli(lawj.at("p").get<double>());
    } else {
        throw DomainError("unknown color law: " + lk);
    }
    if (!j.contains("dependence") ||
        j.at("dependence").at("kind").get<std::string>() == "product")
        return RandomModel::product(law);
    const json& dep = j.at("dependence");
    std::string agg = dep.value("aggregator", "max");
    return RandomModel::block(law, dep.at("rho").get<int>(),
                              agg == "max" ? RandomModel::Aggregator::Max
                                           : RandomModel::Aggregator::MeanThenQuantize);
}

inline json field_descriptor_json(const AdmissibleField& f) {
    json j;
    j["kind"] = f.kind;
    if (f.kind == "eigenvalue_count") j["coupling"] = f.coupling;
    j["k_f"] = f.k_f;
    j["c_b"] = f.boundary.c_b;
    j["boundary"] = f.boundary.kind;
    return j;
}

// ---- step function / tiling --------------------------------------------------

inline json to_json(const StepFunction& f) {
    json j;
    j["breakpoints"] = f.breakpoints();
    j["values"] = f.values();
    return j;
}

inline json to_json(const TilingDiagnostics& d) {
    json j;
    j["cover_fraction"] = d.cover_fraction;
    j["density_tolerance"] = d.density_tolerance;
    j["density_deviation"] = d.density_deviation;
    j["center_density_deviation"] = d.center_density_deviation;
    j["center_density_bound"] = d.center_density_bound;
    j["flags"] = {{"contained", d.contained},
                  {"cross_disjoint", d.cross_disjoint},
                  {"eps_disjoint", d.eps_disjoint},
                  {"cover_ok", d.cover_ok},
                  {"density_ok", d.density_ok},
                  {"center_density_ok", d.center_density_ok},
                  {"pass", d.pass}};
    return j;
}

inline json to_json(const QuasiTiling& qt) {
    json j;
    j["eps"] = qt.eps;
    j["window_size"] = qt.window.size();
    json tiles = json::array();
    for (const auto& k : qt.tiles) tiles.push_back(k.size());
    j["tile_sizes"] = tiles;
    json centers = json::array();
    for (std::size_t i = 0; i < qt.centers.size(); ++i) {
        json c = json::array();
        for (const auto& t : qt.centers[i]) c.push_back(to_json(qt.window.group(), t));
        centers.push_back(c);
    }
    j["centers"] = centers;
    j["diagnostics"] = to_json(qt.diagnostics);
    return j;
}

inline json to_json(const AuditReport& r) {
    json j;
    j["max_abs_correlation"] = r.max_abs_correlation;
    j["dependence_flagged"] = r.dependence_flagged;
    j["degenerate"] = r.degenerate;
    j["max_ks_distance"] = r.max_ks_distance;
    j["pairs_checked"] = r.pairs_checked;
    j["trials"] = r.trials;
    j["cores_exact_every_run"] = r.cores_exact_every_run;
    return j;
}

// ---- experiment config --------------------------------------------------------

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.group = group_from_json(j.at("group"));
    cfg.model = model_from_json(j.at("model"));
    const json& fj = j.at("field");
    cfg.field_kind = fj.at("kind").get<std::string>();
    cfg.coupling = fj.value("coupling", 1.0);
    cfg.window_generator = j.value("window_generator", default_folner_generator(cfg.group));
    cfg.window_indices = j.at("window_indices").get<std::vector<std::int64_t>>();
    cfg.tile_selection = j.value("tile_selection", std::string("consecutive"));
    cfg.tile_generator = j.value("tile_generator", std::string(""));
    cfg.eps_grid = j.at("eps_grid").get<std::vector<double>>();
    cfg.kappa = j.value("kappa", -1.0);
    if (j.contains("seeds")) {
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
        std::uint64_t base = j.at("seed_base").get<std::uint64_t>();
        std::size_t count = j.at("seed_count").get<std::size_t>();
        for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
    }
    cfg.fstar_method = j.value("fstar_method", std::string("analytic"));
    if (j.contains("fstar")) {
        const json& fs = j.at("fstar");
        cfg.fstar.j_big = fs.value("j_big", cfg.fstar.j_big);
        cfg.fstar.j_check = fs.value("j_check", cfg.fstar.j_check);
        cfg.fstar.seeds = fs.value("seeds", cfg.fstar.seeds);
        cfg.fstar.grid_points = fs.value("grid_points", cfg.fstar.grid_points);
        cfg.fstar.seed = fs.value("seed", cfg.fstar.seed);
    }
    cfg.with_decomposition = j.value("with_decomposition", true);
    cfg.with_gc = j.value("with_gc", true);
    cfg.gate_min_pass_frequency = j.value("gate_min_pass_frequency", 0.99);
    cfg.gate_monotone_in_j = j.value("gate_monotone_in_j", true);
    return cfg;
}

// ---- report emission -----------------------------------------------------------

inline std::string convergence_csv(const ConvergenceReport& rep) {
    std::string out = "j,window_size,eps,seed,observed,fine_bound,coarse_bound,pass\n";
    for (const auto& r : rep.rows) {
        out += std::to_string(r.j) + "," + std::to_string(r.window_size) + "," +
               fmt_double(r.eps) + "," + std::to_string(r.seed) + "," +
               fmt_double(r.cert.observed) + "," + fmt_double(r.cert.fine_bound) + "," +
               fmt_double(r.cert.coarse_bound) + "," + (r.cert.pass ? "1" : "0") + "\n";
    }
    return out;
}

inline json convergence_summary_json(const ConvergenceReport& rep) {
    json j;
    j["field"] = rep.field_kind;
    j["gates_ok"] = rep.gates_ok;
    j["monotone_ok"] = rep.monotone_ok;
    j["fstar"] = {{"method", rep.fstar.method},
                  {"uncertainty_band", rep.fstar.uncertainty_band},
                  {"self_consistency", rep.fstar.self_consistency},
                  {"grid_resolution", rep.fstar.grid_resolution}};
    json freqs = json::array();
    for (const auto& c : rep.frequencies)
        freqs.push_back({{"eps", c.eps},
                         {"j", c.j},
                         {"runs", c.runs},
                         {"passes", c.passes},
                         {"frequency", c.frequency()}});
    j["frequencies"] = freqs;
    json extras = json::array();
    for (const auto& r : rep.rows) {
        json e;
        e["j"] = r.j;
        e["eps"] = r.eps;
        e["seed"] = r.seed;
        e["below_j0"] = r.below_j0;
        if (r.gc_distance >= 0.0) e["gc_distance"] = r.gc_distance;
        if (r.decomposition_total_observed >= 0.0) {
            e["decomposition_total_observed"] = r.decomposition_total_observed;
            e["decomposition_total_bound"] = r.decomposition_total_bound;
            e["decomposition_consistent"] = r.decomposition_consistent;
        }
        extras.push_back(e);
    }
    j["runs"] = extras;
    return j;
}

// per-tile component rows for every run that carries a decomposition
inline std::string decomposition_csv(const ConvergenceReport& rep) {
    std::string out =
        "j,eps,seed,tile,eta,centers,b_observed,b_bound,c_observed,c_bound,"
        "a_observed,a_bound,total_observed,total_bound\n";
    for (const auto& r : rep.rows) {
        if (!r.decomposition) continue;
        const ErrorDecomposition& d = *r.decomposition;
        for (std::size_t i = 0; i < d.b_observed.size(); ++i) {
            out += std::to_string(r.j) + "," + fmt_double(r.eps) + "," + std::to_string(r.seed) +
                   "," + std::to_string(i + 1) + "," + fmt_double(eta_or_zero(d.eps, static_cast<int>(i) + 1)) +
                   "," + std::to_string(d.centers_used[i]) + "," + fmt_double(d.b_observed[i]) +
                   "," + fmt_double(d.b_bound[i]) + "," + fmt_double(d.c_observed[i]) + "," +
                   fmt_double(d.c_bound[i]) + "," + fmt_double(d.a_observed) + "," +
                   fmt_double(d.a_bound) + "," + fmt_double(d.total_observed) + "," +
                   fmt_double(d.total_bound) + "\n";
        }
    }
    return out;
}

// staircase as paired columns
inline std::string step_function_csv(const StepFunction& f) {
    std::string out = "breakpoint,value\n,";
    out += fmt_double(f.values()[0]) + "\n";
    for (std::size_t i = 0; i < f.breakpoints().size(); ++i)
        out += fmt_double(f.breakpoints()[i]) + "," + fmt_double(f.values()[i + 1]) + "\n";
    return out;
}

inline std::string coloring_csv(const Coloring& c) {
    std::string out = "element,value\n";
    for (std::size_t i = 0; i < c.window.size(); ++i) {
        out += "\"" + to_json(c.window.group(), c.window.elements()[i]).dump() + "\"," +
               fmt_double(c.values[i]) + "\n";
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << content;
}

} // namespace quasitile
